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

#ifndef LAS_TRAINING_H_
#define LAS_TRAINING_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <ostream>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "las/decoding.h"
#include "las/model.h"
#include "las/parameters.h"
#include "las/wordpiece.h"

namespace las::training {

using autograd::Gradients;
using autograd::ParameterSet;
using autograd::Tape;
using autograd::Tensor;
using autograd::Var;

struct TrainConfig {
  std::size_t batch_size = 8;
  double peak_lr = 2e-3;
  std::size_t lr_ramp_steps = 0;  // 0: constant from step 0
  double label_smoothing = 0.0;
  double ss_target_prob = 0.0;
  std::size_t ss_ramp_steps = 1000;
  double mwer_lambda = 0.01;
  std::size_t mwer_nbest = 4;
  bool grad_tracker = false;
  double grad_tracker_factor = 4.0;
  double grad_tracker_decay = 0.99;
  double clip_norm = 1.0;
  std::size_t replicas = 1;
  std::size_t ce_steps = 1000;
  std::size_t mwer_steps = 0;
  std::size_t checkpoint_every = 0;  // 0: only at the end
  std::uint64_t seed = 1;

  // ConfigError on violation.
  void Validate() const;
  nlohmann::json ToJson() const;
  static TrainConfig FromJson(const nlohmann::json& j, TrainConfig base);
  static TrainConfig FromJson(const nlohmann::json& j) { return FromJson(j, TrainConfig()); }

  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

// Per step: q = (1 - eps) onehot + eps / V, loss -sum q log softmax(z),
// averaged over steps.
Var SmoothedCrossEntropy(const std::vector<Var>& logits, const std::vector<int>& target, double eps);

// min(step / ramp, 1) * target; 0 at step 0.
double SsProbability(std::size_t step, const TrainConfig& cfg);
// Linear 0 -> peak over lr_ramp_steps, then constant.
double LearningRate(std::size_t step, const TrainConfig& cfg);

// Decoder pass where each step's input token is, with probability p, drawn
// from the previous step's softmax instead of the ground truth. One
// decision per step. p = 0 reproduces teacher forcing exactly.
std::vector<Var> ForwardScheduledSampling(const model::BoundModel& m, const model::EncoderOutput& enc,
                                          const std::vector<int>& target, double p,
                                          std::mt19937_64& rng);

class GradTracker {
 public:
  GradTracker(double factor = 4.0, double decay = 0.99) : factor_(factor), decay_(decay) {}

  // True when accepted. The first norm seeds the moving average.
  bool Update(double grad_norm);

  double ema() const { return ema_; }
  bool initialized() const { return initialized_; }
  std::size_t rejected() const { return rejected_; }

  nlohmann::json ToJson() const;
  void FromJson(const nlohmann::json& j);

 private:
  double factor_, decay_;
  double ema_ = 0.0;
  bool initialized_ = false;
  std::size_t rejected_ = 0;
};

// N-best with word errors against the reference, best first.
struct ScoredNBest {
  decoding::NBestList hyps;
  std::vector<double> word_errors;
};

// (1/N) sum_i (W_i - mean W) * softmax(log_probs)_i + lambda * ce. The
// renormalized probabilities are differentiable through `log_probs`.
// ContractError on an empty list.
Var MwerLoss(std::span<const Var> log_probs, std::span<const double> word_errors, Var ce,
             double lambda);
// Same first term on plain numbers.
double MwerExpectedErrorTerm(std::span<const double> log_probs, std::span<const double> word_errors);

// Mean of the replica gradients.
Gradients SyncAccumulate(std::span<const Gradients> replicas);

class Adam {
 public:
  explicit Adam(const ParameterSet& like, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);
  void Step(ParameterSet& params, const Gradients& grads, double lr);

  std::size_t steps() const { return t_; }
  const ParameterSet& first_moment() const { return m_; }
  const ParameterSet& second_moment() const { return v_; }
  void Restore(ParameterSet m, ParameterSet v, std::size_t t);

 private:
  double beta1_, beta2_, eps_;
  ParameterSet m_, v_;
  std::size_t t_ = 0;
};

struct Example {
  std::string id;
  Tensor features;          // [T' x input_dim]
  std::vector<int> tokens;  // ends with eos
  std::string transcript;
};

struct StepRecord {
  std::size_t step = 0;
  std::string phase;  // "ce" or "mwer"
  double lr = 0.0;
  double ss_prob = 0.0;
  double loss = 0.0;
  double grad_norm = 0.0;
  bool accepted = true;

  nlohmann::json ToJson() const;
};

// Runs the CE phase, then the MWER phase, over an in-memory dataset.
// Batches come from a per-epoch shuffle seeded by (seed, epoch); sampling
// inside a step is seeded by (seed, step, utterance), so a resumed run
// matches an uninterrupted one.
class Trainer {
 public:
  Trainer(model::ModelConfig model_cfg, TrainConfig cfg, ParameterSet params,
          const wordpiece::Vocab* vocab);

  const ParameterSet& params() const { return params_; }
  const model::ModelConfig& model_config() const { return model_cfg_; }
  const TrainConfig& config() const { return cfg_; }
  std::size_t step() const { return step_; }
  const GradTracker& tracker() const { return tracker_; }
  bool done() const { return step_ >= cfg_.ce_steps + cfg_.mwer_steps; }

  // One global step on the batch chosen for the current step.
  StepRecord TrainStep(std::span<const Example> data);

  // Runs to completion. `log` (optional) receives one JSON line per step;
  // checkpoints go to `<ckpt_dir>/step-<n>` and `<ckpt_dir>/final` when
  // ckpt_dir is non-empty.
  void Run(std::span<const Example> data, std::ostream* log,
           const std::filesystem::path& ckpt_dir = {},
           const std::function<void(const StepRecord&)>& on_step = {});

  // Model checkpoint plus optimizer and trainer state.
  void Save(const std::filesystem::path& stem) const;
  static Trainer Resume(const std::filesystem::path& stem, const wordpiece::Vocab* vocab);

  // Mean smoothed CE (teacher forced) over `data`, no update.
  double EvaluateLoss(std::span<const Example> data) const;

  // Gradients of the batch loss for the given phase, with the loss value.
  Gradients BatchGradients(std::span<const Example> batch, bool mwer, double* loss) const;

  // N-best with word errors for MWER; word errors are computed on
  // detokenized words.
  ScoredNBest NBestFor(const Example& ex) const;

 private:
  std::vector<std::size_t> BatchIndices(std::size_t step, std::size_t n) const;
  Gradients ExampleGradients(const Example& ex, bool mwer, std::size_t utt, double* loss) const;

  model::ModelConfig model_cfg_;
  TrainConfig cfg_;
  ParameterSet params_;
  const wordpiece::Vocab* vocab_;
  Adam adam_;
  GradTracker tracker_;
  std::size_t step_ = 0;
};

// Mixes seeds for sub-streams.
std::uint64_t MixSeed(std::uint64_t a, std::uint64_t b, std::uint64_t c = 0);

}  // namespace las::training

#endif  // LAS_TRAINING_H_
