// Copyright 2026 The las-desk Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Listen, attend and spell.
//
// Listener: stacked LSTMs over stacked log-mel frames, optionally
// bidirectional (directions concatenated per layer). No time reduction
// happens inside the encoder.
// Attender: additive attention, one or more heads. Each head projects the
// query and the encoder states to attention_dim; head contexts are
// concatenated and projected back to the encoder width.
// Speller: LSTM stack fed [embedding(y_{i-1}), c_{i-1}]; the softmax layer
// sees [s_i, c_i].
//
// Parameter names:
//   enc/l<k>/<fw|bw>/{wx,wh,b}
//   att/h<k>/{ws,we,v}  att/wo  att/bo
//   dec/emb  dec/l<k>/{wx,wh,b}
//   out/w  out/b
// LSTM gate order along the 4n axis is input, forget, cell, output.

#ifndef LAS_MODEL_H_
#define LAS_MODEL_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "las/ops.h"
#include "las/parameters.h"
#include "las/tape.h"
#include "las/tensor.h"

namespace las::model {

using autograd::ParameterSet;
using autograd::Tape;
using autograd::Tensor;
using autograd::Var;

struct ModelConfig {
  std::size_t input_dim = 320;
  std::size_t enc_layers = 3;
  std::size_t enc_units = 64;
  bool bidirectional = false;
  std::size_t dec_layers = 1;
  std::size_t dec_units = 64;
  std::size_t attention_heads = 2;
  std::size_t attention_dim = 32;
  std::size_t vocab_size = 60;
  std::size_t embedding_dim = 32;
  int sos_id = 0;
  int eos_id = 1;

  std::size_t encoder_width() const { return bidirectional ? 2 * enc_units : enc_units; }
  // Throws ConfigError.
  void Validate() const;

  nlohmann::json ToJson() const;
  // Missing keys keep their defaults; unknown keys are a ConfigError.
  static ModelConfig FromJson(const nlohmann::json& j, ModelConfig base);
  static ModelConfig FromJson(const nlohmann::json& j) { return FromJson(j, ModelConfig()); }

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

// Desk scale, used by the toy task.
ModelConfig DeskConfig(std::size_t vocab_size);
// 2 encoder layers x 8, 1 decoder layer x 8, V = 6; for gradient checks.
ModelConfig MicroConfig();
// Paper-scale shapes, kept for reference and parameter counting.
ModelConfig PaperUnidirectionalConfig(std::size_t vocab_size);
ModelConfig PaperBidirectionalConfig(std::size_t vocab_size);

// Uniform(-0.05, 0.05) weights, zero biases, forget-gate bias 1.
ParameterSet InitParameters(const ModelConfig& cfg, std::uint64_t seed);

struct EncoderOutput {
  Var h;                            // [T' x encoder_width]
  std::size_t length = 0;           // true length
  std::vector<std::uint8_t> valid;  // per frame; attention never lands on 0
  std::vector<Var> keys;            // per head, [T' x attention_dim]

  std::size_t frames() const { return valid.size(); }
};

struct AttentionResult {
  Var context;                     // [1 x encoder_width], after projection
  std::vector<Var> head_contexts;  // per head, [1 x encoder_width]
  std::vector<Var> weights;        // per head, [1 x T']
};

struct DecoderState {
  std::vector<Var> h;  // per layer, [1 x dec_units]
  std::vector<Var> c;
  Var context;         // c_{i-1}
};

struct StepOutput {
  Var logits;  // [1 x V]
  DecoderState state;
  AttentionResult attention;
};

struct SequenceScore {
  Var total;                   // scalar log P(y|x)
  std::vector<double> steps;   // per-token log-probs
};

// Parameters registered on a tape, plus the forward pass.
class BoundModel {
 public:
  // trainable = false binds parameters as constants (inference).
  BoundModel(Tape& tape, const ModelConfig& cfg, const ParameterSet& params,
             bool trainable = true);
  // Uses already-bound parameter vars, in ParameterSet order.
  BoundModel(Tape& tape, const ModelConfig& cfg, const ParameterSet& params,
             std::vector<Var> bound);

  const ModelConfig& config() const { return cfg_; }
  Tape& tape() const { return *tape_; }
  const std::vector<Var>& parameters() const { return bound_; }

  // features: [T' x input_dim]. length < T' masks trailing frames.
  EncoderOutput Encode(const Tensor& features, std::optional<std::size_t> length = {}) const;

  // Wraps externally supplied encoder states ([T' x encoder_width]).
  EncoderOutput WrapEncoderStates(Var h, std::vector<std::uint8_t> valid) const;

  // Dispatches on the head count; the two paths are also exposed directly.
  AttentionResult Attend(Var query, const EncoderOutput& enc) const;
  AttentionResult AttendSingleHead(Var query, const EncoderOutput& enc) const;
  AttentionResult AttendMultiHead(Var query, const EncoderOutput& enc) const;

  DecoderState InitialState() const;
  // Throws InputError on an out-of-range token.
  StepOutput Step(const DecoderState& state, const EncoderOutput& enc, int prev_token) const;

  // Teacher-forced logits for every position of `target` (which ends in eos).
  std::vector<Var> TeacherForcedLogits(const EncoderOutput& enc,
                                       const std::vector<int>& target) const;
  // Sum of per-step log-softmax entries of `target` under teacher forcing.
  SequenceScore SeqLogProb(const EncoderOutput& enc, const std::vector<int>& target) const;

 private:
  struct Lstm {
    Var wx, wh, b;
  };
  struct Head {
    Var ws, we, v;
  };

  Var Param(const ParameterSet& params, const std::string& name) const;
  void Resolve(const ParameterSet& params);
  Var RunLstm(Var x, const Lstm& p, bool reverse) const;
  Var HeadContext(Var query, const EncoderOutput& enc, std::size_t k, Var* weights) const;

  Tape* tape_;
  ModelConfig cfg_;
  std::vector<Var> bound_;
  std::vector<std::vector<Lstm>> enc_;  // [layer][direction]
  std::vector<Head> heads_;
  Var wo_, bo_;
  Var emb_;
  std::vector<Lstm> dec_;
  Var out_w_, out_b_;
};

// Checkpoint plus the model config under metadata["model_config"].
void SaveModel(const std::filesystem::path& stem, const ModelConfig& cfg,
               const ParameterSet& params, nlohmann::json metadata = nlohmann::json::object());

struct LoadedModel {
  ModelConfig config;
  ParameterSet params;
  nlohmann::json metadata;
};
LoadedModel LoadModel(const std::filesystem::path& stem);

}  // namespace las::model

#endif  // LAS_MODEL_H_
