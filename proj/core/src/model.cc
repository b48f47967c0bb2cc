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

#include "las/model.h"

#include <algorithm>
#include <random>

#include "las/error.h"

namespace las::model {

namespace {

using autograd::BroadcastRows;
using autograd::Concat;
using autograd::LogSoftmax;
using autograd::MaskedSoftmax;
using autograd::MatMul;
using autograd::Pick;
using autograd::Reshape;
using autograd::Sigmoid;
using autograd::SliceCols;
using autograd::SliceRows;
using autograd::Tanh;

constexpr double kInitRange = 0.05;
constexpr double kForgetBias = 1.0;

std::string LstmPrefix(const std::string& base, std::size_t layer, const char* dir) {
  std::string p = base + "/l" + std::to_string(layer);
  if (dir) p += std::string("/") + dir;
  return p;
}

struct LstmCellOut {
  Var h, c;
};

// gates_x already holds x * Wx + b.
LstmCellOut LstmCell(Var gates_x, Var h, Var c, Var wh, std::size_t n) {
  const Var gates = gates_x + MatMul(h, wh);
  const Var i = Sigmoid(SliceCols(gates, 0, n));
  const Var f = Sigmoid(SliceCols(gates, n, 2 * n));
  const Var g = Tanh(SliceCols(gates, 2 * n, 3 * n));
  const Var o = Sigmoid(SliceCols(gates, 3 * n, 4 * n));
  const Var c_next = f * c + i * g;
  return {o * Tanh(c_next), c_next};
}

}  // namespace

void ModelConfig::Validate() const {
  auto positive = [](std::size_t v, const char* name) {
    if (v == 0) throw ConfigError(std::string("model config: ") + name + " must be > 0");
  };
  positive(input_dim, "input_dim");
  positive(enc_layers, "enc_layers");
  positive(enc_units, "enc_units");
  positive(dec_layers, "dec_layers");
  positive(dec_units, "dec_units");
  positive(attention_heads, "attention_heads");
  positive(attention_dim, "attention_dim");
  positive(vocab_size, "vocab_size");
  positive(embedding_dim, "embedding_dim");
  const auto v = static_cast<int>(vocab_size);
  if (sos_id < 0 || sos_id >= v || eos_id < 0 || eos_id >= v) {
    throw ConfigError("model config: sos/eos ids must lie inside the vocab");
  }
}

nlohmann::json ModelConfig::ToJson() const {
  return {{"input_dim", input_dim},         {"enc_layers", enc_layers},
          {"enc_units", enc_units},         {"bidirectional", bidirectional},
          {"dec_layers", dec_layers},       {"dec_units", dec_units},
          {"attention_heads", attention_heads}, {"attention_dim", attention_dim},
          {"vocab_size", vocab_size},       {"embedding_dim", embedding_dim},
          {"sos_id", sos_id},               {"eos_id", eos_id}};
}

ModelConfig ModelConfig::FromJson(const nlohmann::json& j, ModelConfig c) {
  if (!j.is_object()) throw ConfigError("model config must be a JSON object");
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "input_dim") c.input_dim = value.get<std::size_t>();
      else if (key == "enc_layers") c.enc_layers = value.get<std::size_t>();
      else if (key == "enc_units") c.enc_units = value.get<std::size_t>();
      else if (key == "bidirectional") c.bidirectional = value.get<bool>();
      else if (key == "dec_layers") c.dec_layers = value.get<std::size_t>();
      else if (key == "dec_units") c.dec_units = value.get<std::size_t>();
      else if (key == "attention_heads") c.attention_heads = value.get<std::size_t>();
      else if (key == "attention_dim") c.attention_dim = value.get<std::size_t>();
      else if (key == "vocab_size") c.vocab_size = value.get<std::size_t>();
      else if (key == "embedding_dim") c.embedding_dim = value.get<std::size_t>();
      else if (key == "sos_id") c.sos_id = value.get<int>();
      else if (key == "eos_id") c.eos_id = value.get<int>();
      else throw ConfigError("unknown model config key: " + key);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("model config: ") + e.what());
  }
  c.Validate();
  return c;
}

ModelConfig DeskConfig(std::size_t vocab_size) {
  ModelConfig c;
  c.vocab_size = vocab_size;
  return c;
}

ModelConfig MicroConfig() {
  ModelConfig c;
  c.input_dim = 5;
  c.enc_layers = 2;
  c.enc_units = 8;
  c.dec_layers = 1;
  c.dec_units = 8;
  c.attention_heads = 2;
  c.attention_dim = 4;
  c.vocab_size = 6;
  c.embedding_dim = 4;
  return c;
}

ModelConfig PaperUnidirectionalConfig(std::size_t vocab_size) {
  ModelConfig c;
  c.enc_layers = 5;
  c.enc_units = 1400;
  c.dec_layers = 2;
  c.dec_units = 1024;
  c.attention_heads = 4;
  c.attention_dim = 512;
  c.vocab_size = vocab_size;
  c.embedding_dim = 128;
  return c;
}

ModelConfig PaperBidirectionalConfig(std::size_t vocab_size) {
  ModelConfig c = PaperUnidirectionalConfig(vocab_size);
  c.enc_units = 1024;
  c.bidirectional = true;
  return c;
}

ParameterSet InitParameters(const ModelConfig& cfg, std::uint64_t seed) {
  cfg.Validate();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-kInitRange, kInitRange);
  ParameterSet p;
  auto weight = [&](const std::string& name, std::size_t r, std::size_t c) {
    Tensor t({r, c});
    for (double& v : t.data()) v = u(rng);
    p.Add(name, std::move(t));
  };
  auto lstm = [&](const std::string& prefix, std::size_t in, std::size_t n) {
    weight(prefix + "/wx", in, 4 * n);
    weight(prefix + "/wh", n, 4 * n);
    Tensor b({1, 4 * n});
    for (std::size_t k = n; k < 2 * n; ++k) b[k] = kForgetBias;
    p.Add(prefix + "/b", std::move(b));
  };

  const std::size_t width = cfg.encoder_width();
  for (std::size_t l = 0; l < cfg.enc_layers; ++l) {
    const std::size_t in = l == 0 ? cfg.input_dim : width;
    lstm(LstmPrefix("enc", l, "fw"), in, cfg.enc_units);
    if (cfg.bidirectional) lstm(LstmPrefix("enc", l, "bw"), in, cfg.enc_units);
  }
  for (std::size_t k = 0; k < cfg.attention_heads; ++k) {
    const std::string prefix = "att/h" + std::to_string(k);
    weight(prefix + "/ws", cfg.dec_units, cfg.attention_dim);
    weight(prefix + "/we", width, cfg.attention_dim);
    weight(prefix + "/v", cfg.attention_dim, 1);
  }
  weight("att/wo", cfg.attention_heads * width, width);
  p.Add("att/bo", Tensor({1, width}));
  weight("dec/emb", cfg.vocab_size, cfg.embedding_dim);
  for (std::size_t l = 0; l < cfg.dec_layers; ++l) {
    const std::size_t in = l == 0 ? cfg.embedding_dim + width : cfg.dec_units;
    lstm(LstmPrefix("dec", l, nullptr), in, cfg.dec_units);
  }
  weight("out/w", cfg.dec_units + width, cfg.vocab_size);
  p.Add("out/b", Tensor({1, cfg.vocab_size}));
  return p;
}

BoundModel::BoundModel(Tape& tape, const ModelConfig& cfg, const ParameterSet& params,
                       bool trainable)
    : BoundModel(tape, cfg, params, autograd::BindParameters(tape, params, trainable)) {}

BoundModel::BoundModel(Tape& tape, const ModelConfig& cfg, const ParameterSet& params,
                       std::vector<Var> bound)
    : tape_(&tape), cfg_(cfg), bound_(std::move(bound)) {
  cfg_.Validate();
  if (bound_.size() != params.size()) {
    throw ContractError("bound parameter count differs from the parameter set");
  }
  Resolve(params);
}

Var BoundModel::Param(const ParameterSet& params, const std::string& name) const {
  const auto i = params.Find(name);
  if (!i) throw ConfigError("parameter set lacks " + name);
  return bound_[*i];
}

void BoundModel::Resolve(const ParameterSet& params) {
  auto lstm = [&](const std::string& prefix) {
    return Lstm{Param(params, prefix + "/wx"), Param(params, prefix + "/wh"),
                Param(params, prefix + "/b")};
  };
  const std::size_t width = cfg_.encoder_width();
  for (std::size_t l = 0; l < cfg_.enc_layers; ++l) {
    std::vector<Lstm> dirs = {lstm(LstmPrefix("enc", l, "fw"))};
    if (cfg_.bidirectional) dirs.push_back(lstm(LstmPrefix("enc", l, "bw")));
    const std::size_t in = l == 0 ? cfg_.input_dim : width;
    if (dirs[0].wx.value().rows() != in || dirs[0].wh.value().rows() != cfg_.enc_units) {
      throw ConfigError("encoder layer " + std::to_string(l) + " shape differs from config");
    }
    enc_.push_back(std::move(dirs));
  }
  for (std::size_t k = 0; k < cfg_.attention_heads; ++k) {
    const std::string prefix = "att/h" + std::to_string(k);
    heads_.push_back(
        {Param(params, prefix + "/ws"), Param(params, prefix + "/we"), Param(params, prefix + "/v")});
  }
  wo_ = Param(params, "att/wo");
  bo_ = Param(params, "att/bo");
  emb_ = Param(params, "dec/emb");
  for (std::size_t l = 0; l < cfg_.dec_layers; ++l) dec_.push_back(lstm(LstmPrefix("dec", l, nullptr)));
  out_w_ = Param(params, "out/w");
  out_b_ = Param(params, "out/b");
  if (emb_.value().rows() != cfg_.vocab_size || out_w_.value().cols() != cfg_.vocab_size ||
      wo_.value().cols() != width) {
    throw ConfigError("parameter shapes differ from model config");
  }
}

Var BoundModel::RunLstm(Var x, const Lstm& p, bool reverse) const {
  const std::size_t t_len = x.value().rows(), n = cfg_.enc_units;
  const Var xw = MatMul(x, p.wx) + BroadcastRows(p.b, t_len);
  Var h = tape_->Constant(Tensor({1, n}));
  Var c = tape_->Constant(Tensor({1, n}));
  std::vector<Var> rows(t_len);
  for (std::size_t k = 0; k < t_len; ++k) {
    const std::size_t t = reverse ? t_len - 1 - k : k;
    const LstmCellOut out = LstmCell(SliceRows(xw, t, t + 1), h, c, p.wh, n);
    h = out.h;
    c = out.c;
    rows[t] = h;
  }
  return t_len == 1 ? rows[0] : Concat(rows, 0);
}

EncoderOutput BoundModel::Encode(const Tensor& features, std::optional<std::size_t> length) const {
  if (features.rank() != 2 || features.cols() != cfg_.input_dim) {
    throw ConfigError("encoder expects [T x " + std::to_string(cfg_.input_dim) + "] features, got " +
                      autograd::ShapeString(features.shape()));
  }
  const std::size_t t_len = features.rows();
  const std::size_t len = length.value_or(t_len);
  if (len == 0 || len > t_len) throw ContractError("encoder length out of range");

  Var x = tape_->Constant(features);
  for (const auto& dirs : enc_) {
    const Var fw = RunLstm(x, dirs[0], false);
    x = dirs.size() == 1 ? fw : Concat({fw, RunLstm(x, dirs[1], true)}, 1);
  }
  std::vector<std::uint8_t> valid(t_len, 0);
  std::fill(valid.begin(), valid.begin() + static_cast<std::ptrdiff_t>(len), 1);
  return WrapEncoderStates(x, std::move(valid));
}

EncoderOutput BoundModel::WrapEncoderStates(Var h, std::vector<std::uint8_t> valid) const {
  const Tensor& hv = h.value();
  if (hv.rank() != 2 || hv.cols() != cfg_.encoder_width() || hv.rows() != valid.size()) {
    throw DimensionError("encoder states " + autograd::ShapeString(hv.shape()) +
                         " do not match width " + std::to_string(cfg_.encoder_width()) +
                         " and mask of " + std::to_string(valid.size()));
  }
  EncoderOutput out;
  out.h = h;
  out.length = static_cast<std::size_t>(std::count(valid.begin(), valid.end(), 1));
  out.valid = std::move(valid);
  for (const auto& head : heads_) out.keys.push_back(MatMul(h, head.we));
  return out;
}

Var BoundModel::HeadContext(Var query, const EncoderOutput& enc, std::size_t k, Var* weights) const {
  const std::size_t t_len = enc.frames();
  const Var q = MatMul(query, heads_[k].ws);
  const Var e = MatMul(Tanh(enc.keys[k] + BroadcastRows(q, t_len)), heads_[k].v);
  const Var alpha = MaskedSoftmax(Reshape(e, {1, t_len}), enc.valid);
  *weights = alpha;
  return MatMul(alpha, enc.h);
}

AttentionResult BoundModel::AttendSingleHead(Var query, const EncoderOutput& enc) const {
  AttentionResult r;
  Var alpha;
  const Var ctx = HeadContext(query, enc, 0, &alpha);
  r.head_contexts = {ctx};
  r.weights = {alpha};
  r.context = MatMul(ctx, wo_) + bo_;
  return r;
}

AttentionResult BoundModel::AttendMultiHead(Var query, const EncoderOutput& enc) const {
  AttentionResult r;
  for (std::size_t k = 0; k < heads_.size(); ++k) {
    Var alpha;
    r.head_contexts.push_back(HeadContext(query, enc, k, &alpha));
    r.weights.push_back(alpha);
  }
  r.context = MatMul(Concat(r.head_contexts, 1), wo_) + bo_;
  return r;
}

AttentionResult BoundModel::Attend(Var query, const EncoderOutput& enc) const {
  if (enc.keys.size() != heads_.size() || enc.valid.size() != enc.h.value().rows()) {
    throw ContractError("encoder output does not match this model");
  }
  return heads_.size() == 1 ? AttendSingleHead(query, enc) : AttendMultiHead(query, enc);
}

DecoderState BoundModel::InitialState() const {
  DecoderState s;
  for (std::size_t l = 0; l < cfg_.dec_layers; ++l) {
    s.h.push_back(tape_->Constant(Tensor({1, cfg_.dec_units})));
    s.c.push_back(tape_->Constant(Tensor({1, cfg_.dec_units})));
  }
  s.context = tape_->Constant(Tensor({1, cfg_.encoder_width()}));
  return s;
}

StepOutput BoundModel::Step(const DecoderState& state, const EncoderOutput& enc, int prev_token) const {
  if (prev_token < 0 || static_cast<std::size_t>(prev_token) >= cfg_.vocab_size) {
    throw InputError("token id " + std::to_string(prev_token) + " outside vocab of " +
                     std::to_string(cfg_.vocab_size));
  }
  const auto tok = static_cast<std::size_t>(prev_token);
  Var x = Concat({SliceRows(emb_, tok, tok + 1), state.context}, 1);
  StepOutput out;
  for (std::size_t l = 0; l < dec_.size(); ++l) {
    const LstmCellOut cell =
        LstmCell(MatMul(x, dec_[l].wx) + dec_[l].b, state.h[l], state.c[l], dec_[l].wh, cfg_.dec_units);
    out.state.h.push_back(cell.h);
    out.state.c.push_back(cell.c);
    x = cell.h;
  }
  out.attention = Attend(x, enc);
  out.state.context = out.attention.context;
  out.logits = MatMul(Concat({x, out.attention.context}, 1), out_w_) + out_b_;
  return out;
}

std::vector<Var> BoundModel::TeacherForcedLogits(const EncoderOutput& enc,
                                                 const std::vector<int>& target) const {
  std::vector<Var> logits;
  DecoderState state = InitialState();
  int prev = cfg_.sos_id;
  for (int y : target) {
    StepOutput s = Step(state, enc, prev);
    logits.push_back(s.logits);
    state = std::move(s.state);
    prev = y;
  }
  return logits;
}

SequenceScore BoundModel::SeqLogProb(const EncoderOutput& enc, const std::vector<int>& target) const {
  if (target.empty() || target.back() != cfg_.eos_id) {
    throw ContractError("scored sequence must end with eos");
  }
  SequenceScore score;
  const std::vector<Var> logits = TeacherForcedLogits(enc, target);
  for (std::size_t i = 0; i < target.size(); ++i) {
    if (target[i] < 0 || static_cast<std::size_t>(target[i]) >= cfg_.vocab_size) {
      throw InputError("token id " + std::to_string(target[i]) + " outside vocab");
    }
    const Var lp = Pick(LogSoftmax(logits[i]), static_cast<std::size_t>(target[i]));
    score.steps.push_back(lp.value()[0]);
    score.total = i == 0 ? lp : score.total + lp;
  }
  return score;
}

void SaveModel(const std::filesystem::path& stem, const ModelConfig& cfg, const ParameterSet& params,
               nlohmann::json metadata) {
  metadata["model_config"] = cfg.ToJson();
  autograd::SaveCheckpoint(stem, params, metadata);
}

LoadedModel LoadModel(const std::filesystem::path& stem) {
  autograd::LoadedCheckpoint ck = autograd::LoadCheckpoint(stem);
  if (!ck.metadata.contains("model_config")) {
    throw InputError("checkpoint " + stem.string() + " has no model_config");
  }
  LoadedModel m{ModelConfig::FromJson(ck.metadata["model_config"]), std::move(ck.params),
                std::move(ck.metadata)};
  Tape probe;
  BoundModel check(probe, m.config, m.params, false);
  return m;
}

}  // namespace las::model
