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

#include "las/training.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "las/error.h"
#include "las/ops.h"

namespace las::training {

namespace {

using autograd::LogSoftmax;
using autograd::Pick;
using autograd::Scale;
using autograd::Sum;

std::uint64_t SplitMix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double Uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::filesystem::path WithSuffix(const std::filesystem::path& stem, const char* suffix) {
  return std::filesystem::path(stem.string() + suffix);
}

}  // namespace

std::uint64_t MixSeed(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  return SplitMix(SplitMix(SplitMix(a) ^ b) ^ c);
}

void TrainConfig::Validate() const {
  auto fail = [](const std::string& m) { throw ConfigError("train config: " + m); };
  if (batch_size == 0) fail("batch_size must be > 0");
  if (replicas == 0 || batch_size % replicas != 0) fail("batch_size must be a multiple of replicas");
  if (!(peak_lr >= 0.0) || !std::isfinite(peak_lr)) fail("peak_lr must be finite and >= 0");
  if (!(label_smoothing >= 0.0 && label_smoothing < 1.0)) fail("label_smoothing must lie in [0, 1)");
  if (!(ss_target_prob >= 0.0 && ss_target_prob <= 1.0)) fail("ss_target_prob must lie in [0, 1]");
  if (!(mwer_lambda >= 0.0)) fail("mwer_lambda must be >= 0");
  if (mwer_nbest == 0) fail("mwer_nbest must be >= 1");
  if (!(grad_tracker_factor > 0.0)) fail("grad_tracker_factor must be > 0");
  if (!(grad_tracker_decay >= 0.0 && grad_tracker_decay < 1.0)) fail("grad_tracker_decay must lie in [0, 1)");
  if (!(clip_norm > 0.0)) fail("clip_norm must be > 0");
}

nlohmann::json TrainConfig::ToJson() const {
  return {{"batch_size", batch_size},
          {"peak_lr", peak_lr},
          {"lr_ramp_steps", lr_ramp_steps},
          {"label_smoothing", label_smoothing},
          {"ss_target_prob", ss_target_prob},
          {"ss_ramp_steps", ss_ramp_steps},
          {"mwer_lambda", mwer_lambda},
          {"mwer_nbest", mwer_nbest},
          {"grad_tracker", grad_tracker},
          {"grad_tracker_factor", grad_tracker_factor},
          {"grad_tracker_decay", grad_tracker_decay},
          {"clip_norm", clip_norm},
          {"replicas", replicas},
          {"ce_steps", ce_steps},
          {"mwer_steps", mwer_steps},
          {"checkpoint_every", checkpoint_every},
          {"seed", seed}};
}

TrainConfig TrainConfig::FromJson(const nlohmann::json& j, TrainConfig c) {
  if (!j.is_object()) throw ConfigError("train config must be a JSON object");
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "batch_size") c.batch_size = v.get<std::size_t>();
      else if (key == "peak_lr") c.peak_lr = v.get<double>();
      else if (key == "lr_ramp_steps") c.lr_ramp_steps = v.get<std::size_t>();
      else if (key == "label_smoothing") c.label_smoothing = v.get<double>();
      else if (key == "ss_target_prob") c.ss_target_prob = v.get<double>();
      else if (key == "ss_ramp_steps") c.ss_ramp_steps = v.get<std::size_t>();
      else if (key == "mwer_lambda") c.mwer_lambda = v.get<double>();
      else if (key == "mwer_nbest") c.mwer_nbest = v.get<std::size_t>();
      else if (key == "grad_tracker") c.grad_tracker = v.get<bool>();
      else if (key == "grad_tracker_factor") c.grad_tracker_factor = v.get<double>();
      else if (key == "grad_tracker_decay") c.grad_tracker_decay = v.get<double>();
      else if (key == "clip_norm") c.clip_norm = v.get<double>();
      else if (key == "replicas") c.replicas = v.get<std::size_t>();
      else if (key == "ce_steps") c.ce_steps = v.get<std::size_t>();
      else if (key == "mwer_steps") c.mwer_steps = v.get<std::size_t>();
      else if (key == "checkpoint_every") c.checkpoint_every = v.get<std::size_t>();
      else if (key == "seed") c.seed = v.get<std::uint64_t>();
      else throw ConfigError("unknown train config key: " + key);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("train config: ") + e.what());
  }
  c.Validate();
  return c;
}

Var SmoothedCrossEntropy(const std::vector<Var>& logits, const std::vector<int>& target, double eps) {
  if (logits.empty() || logits.size() != target.size()) {
    throw ContractError("cross entropy: " + std::to_string(logits.size()) + " logit rows for " +
                        std::to_string(target.size()) + " targets");
  }
  Var total;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    const Var lsm = LogSoftmax(logits[i]);
    const auto v = static_cast<double>(lsm.value().size());
    Var step = Scale(Pick(lsm, static_cast<std::size_t>(target[i])), -(1.0 - eps));
    if (eps > 0.0) step = step + Scale(Sum(lsm), -eps / v);
    total = i == 0 ? step : total + step;
  }
  return Scale(total, 1.0 / static_cast<double>(logits.size()));
}

double SsProbability(std::size_t step, const TrainConfig& cfg) {
  if (cfg.ss_ramp_steps == 0) return cfg.ss_target_prob;
  const double frac = std::min(1.0, static_cast<double>(step) / static_cast<double>(cfg.ss_ramp_steps));
  return frac * cfg.ss_target_prob;
}

double LearningRate(std::size_t step, const TrainConfig& cfg) {
  if (cfg.lr_ramp_steps == 0) return cfg.peak_lr;
  const double frac = std::min(1.0, static_cast<double>(step) / static_cast<double>(cfg.lr_ramp_steps));
  return frac * cfg.peak_lr;
}

std::vector<Var> ForwardScheduledSampling(const model::BoundModel& m, const model::EncoderOutput& enc,
                                          const std::vector<int>& target, double p,
                                          std::mt19937_64& rng) {
  std::vector<Var> logits;
  model::DecoderState state = m.InitialState();
  int prev = m.config().sos_id;
  for (std::size_t i = 0; i < target.size(); ++i) {
    model::StepOutput out = m.Step(state, enc, prev);
    logits.push_back(out.logits);
    state = std::move(out.state);
    prev = target[i];
    if (p > 0.0 && i + 1 < target.size() && Uniform01(rng) < p) {
      const auto z = logits.back().value().data();
      const double mx = *std::max_element(z.begin(), z.end());
      std::vector<double> w(z.size());
      double sum = 0.0;
      for (std::size_t k = 0; k < z.size(); ++k) sum += (w[k] = std::exp(z[k] - mx));
      double u = Uniform01(rng) * sum;
      std::size_t k = 0;
      while (k + 1 < w.size() && u >= w[k]) u -= w[k++];
      prev = static_cast<int>(k);
    }
  }
  return logits;
}

bool GradTracker::Update(double grad_norm) {
  if (!std::isfinite(grad_norm)) {
    ++rejected_;
    return false;
  }
  if (!initialized_) {
    ema_ = grad_norm;
    initialized_ = true;
    return true;
  }
  if (grad_norm > factor_ * ema_) {
    ++rejected_;
    return false;
  }
  ema_ = decay_ * ema_ + (1.0 - decay_) * grad_norm;
  return true;
}

nlohmann::json GradTracker::ToJson() const {
  return {{"factor", factor_}, {"decay", decay_}, {"ema", ema_},
          {"initialized", initialized_}, {"rejected", rejected_}};
}

void GradTracker::FromJson(const nlohmann::json& j) {
  factor_ = j.at("factor").get<double>();
  decay_ = j.at("decay").get<double>();
  ema_ = j.at("ema").get<double>();
  initialized_ = j.at("initialized").get<bool>();
  rejected_ = j.at("rejected").get<std::size_t>();
}

Var MwerLoss(std::span<const Var> log_probs, std::span<const double> word_errors, Var ce,
             double lambda) {
  if (log_probs.empty()) throw ContractError("MWER loss over an empty N-best list");
  if (log_probs.size() != word_errors.size()) throw ContractError("MWER: one error count per hypothesis");
  const std::size_t n = log_probs.size();
  std::vector<Var> cells;
  for (const Var& lp : log_probs) cells.push_back(autograd::Reshape(lp, {1, 1}));
  const Var p_hat = autograd::Softmax(n == 1 ? cells[0] : autograd::Concat(cells, 1));
  const double mean = std::accumulate(word_errors.begin(), word_errors.end(), 0.0) / static_cast<double>(n);
  Tensor centered({1, n});
  for (std::size_t i = 0; i < n; ++i) centered[i] = (word_errors[i] - mean) / static_cast<double>(n);
  Tape& tape = *p_hat.tape();
  const Var first = Sum(p_hat * tape.Constant(std::move(centered)));
  return first + Scale(ce, lambda);
}

double MwerExpectedErrorTerm(std::span<const double> log_probs, std::span<const double> word_errors) {
  if (log_probs.empty()) throw ContractError("MWER term over an empty N-best list");
  const std::size_t n = log_probs.size();
  const double mx = *std::max_element(log_probs.begin(), log_probs.end());
  double z = 0.0;
  for (double lp : log_probs) z += std::exp(lp - mx);
  const double mean = std::accumulate(word_errors.begin(), word_errors.end(), 0.0) / static_cast<double>(n);
  double term = 0.0;
  for (std::size_t i = 0; i < n; ++i) term += (word_errors[i] - mean) * std::exp(log_probs[i] - mx) / z;
  return term / static_cast<double>(n);
}

Gradients SyncAccumulate(std::span<const Gradients> replicas) {
  if (replicas.empty()) throw ContractError("sync accumulate over zero replicas");
  Gradients total = replicas[0];
  for (std::size_t r = 1; r < replicas.size(); ++r) autograd::AddInto(total, replicas[r]);
  if (replicas.size() > 1) autograd::ScaleInPlace(total, 1.0 / static_cast<double>(replicas.size()));
  return total;
}

Adam::Adam(const ParameterSet& like, double beta1, double beta2, double eps)
    : beta1_(beta1), beta2_(beta2), eps_(eps) {
  for (const auto& e : like.entries()) {
    m_.Add(e.name, Tensor(e.value.shape()));
    v_.Add(e.name, Tensor(e.value.shape()));
  }
}

void Adam::Step(ParameterSet& params, const Gradients& grads, double lr) {
  if (grads.size() != params.size() || params.size() != m_.size()) {
    throw ContractError("optimizer: gradient count differs from parameter count");
  }
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto p = params.value(i).data();
    auto m = m_.value(i).data();
    auto v = v_.value(i).data();
    const auto g = grads[i].data();
    for (std::size_t k = 0; k < p.size(); ++k) {
      m[k] = beta1_ * m[k] + (1.0 - beta1_) * g[k];
      v[k] = beta2_ * v[k] + (1.0 - beta2_) * g[k] * g[k];
      if (lr != 0.0) p[k] -= lr * (m[k] / c1) / (std::sqrt(v[k] / c2) + eps_);
    }
  }
}

void Adam::Restore(ParameterSet m, ParameterSet v, std::size_t t) {
  if (m.size() != m_.size() || v.size() != v_.size()) throw InputError("optimizer state does not match model");
  m_ = std::move(m);
  v_ = std::move(v);
  t_ = t;
}

nlohmann::json StepRecord::ToJson() const {
  return {{"step", step},       {"phase", phase},         {"lr", lr},
          {"ss_prob", ss_prob}, {"loss", loss},           {"grad_norm", grad_norm},
          {"accepted", accepted}};
}

Trainer::Trainer(model::ModelConfig model_cfg, TrainConfig cfg, ParameterSet params,
                 const wordpiece::Vocab* vocab)
    : model_cfg_(std::move(model_cfg)),
      cfg_(std::move(cfg)),
      params_(std::move(params)),
      vocab_(vocab),
      adam_(params_),
      tracker_(cfg_.grad_tracker_factor, cfg_.grad_tracker_decay) {
  model_cfg_.Validate();
  cfg_.Validate();
  if (cfg_.mwer_steps > 0 && !vocab_) throw ConfigError("MWER training needs a vocab for word errors");
}

std::vector<std::size_t> Trainer::BatchIndices(std::size_t step, std::size_t n) const {
  std::vector<std::size_t> out;
  std::size_t cached_epoch = SIZE_MAX;
  std::vector<std::size_t> perm(n);
  for (std::size_t k = 0; k < cfg_.batch_size; ++k) {
    const std::size_t g = step * cfg_.batch_size + k;
    const std::size_t epoch = g / n;
    if (epoch != cached_epoch) {
      std::iota(perm.begin(), perm.end(), 0);
      std::mt19937_64 rng(MixSeed(cfg_.seed, epoch, 0xba7c4));
      // Fisher-Yates with our own draws; std::shuffle's sequence is
      // implementation-defined.
      for (std::size_t i = n; i > 1; --i) std::swap(perm[i - 1], perm[rng() % i]);
      cached_epoch = epoch;
    }
    out.push_back(perm[g % n]);
  }
  return out;
}

ScoredNBest Trainer::NBestFor(const Example& ex) const {
  ScoredNBest out;
  out.hyps = decoding::Decode(model_cfg_, params_, ex.features,
                              {.beam_width = cfg_.mwer_nbest, .nbest = cfg_.mwer_nbest, .max_len = 0});
  for (const auto& h : out.hyps) {
    const std::string text = vocab_ ? wordpiece::Detokenize(h.tokens, *vocab_).text : std::string();
    out.word_errors.push_back(static_cast<double>(decoding::WordEditDistance(ex.transcript, text).errors()));
  }
  return out;
}

Gradients Trainer::ExampleGradients(const Example& ex, bool mwer, std::size_t utt, double* loss) const {
  Tape tape;
  model::BoundModel m(tape, model_cfg_, params_);
  const model::EncoderOutput enc = m.Encode(ex.features);
  Var l;
  if (!mwer) {
    std::mt19937_64 rng(MixSeed(cfg_.seed, step_, utt));
    const auto logits = ForwardScheduledSampling(m, enc, ex.tokens, SsProbability(step_, cfg_), rng);
    l = SmoothedCrossEntropy(logits, ex.tokens, cfg_.label_smoothing);
  } else {
    const ScoredNBest nb = NBestFor(ex);
    std::vector<Var> lps;
    for (const auto& h : nb.hyps) lps.push_back(m.SeqLogProb(enc, h.tokens).total);
    const Var ce = SmoothedCrossEntropy(m.TeacherForcedLogits(enc, ex.tokens), ex.tokens,
                                        cfg_.label_smoothing);
    l = MwerLoss(lps, nb.word_errors, ce, cfg_.mwer_lambda);
  }
  *loss = l.value().item();
  tape.Backward(l);
  return autograd::CollectGradients(tape, m.parameters());
}

Gradients Trainer::BatchGradients(std::span<const Example> batch, bool mwer, double* loss) const {
  const std::size_t per = batch.size() / cfg_.replicas;
  if (per == 0 || batch.size() % cfg_.replicas != 0) throw ContractError("batch does not split across replicas");
  std::vector<Gradients> replicas;
  double total = 0.0;
  for (std::size_t r = 0; r < cfg_.replicas; ++r) {
    Gradients g = autograd::ZeroGradients(params_);
    for (std::size_t k = r * per; k < (r + 1) * per; ++k) {
      double l = 0.0;
      autograd::AddInto(g, ExampleGradients(batch[k], mwer, k, &l));
      total += l;
    }
    autograd::ScaleInPlace(g, 1.0 / static_cast<double>(per));
    replicas.push_back(std::move(g));
  }
  *loss = total / static_cast<double>(batch.size());
  return SyncAccumulate(replicas);
}

StepRecord Trainer::TrainStep(std::span<const Example> data) {
  if (data.empty()) throw InputError("training set is empty");
  if (done()) throw ContractError("training already finished");
  const bool mwer = step_ >= cfg_.ce_steps;
  std::vector<Example> batch;
  for (std::size_t i : BatchIndices(step_, data.size())) batch.push_back(data[i]);

  StepRecord rec;
  rec.step = step_;
  rec.phase = mwer ? "mwer" : "ce";
  rec.lr = LearningRate(step_, cfg_);
  rec.ss_prob = mwer ? 0.0 : SsProbability(step_, cfg_);
  Gradients g = BatchGradients(batch, mwer, &rec.loss);
  rec.grad_norm = autograd::GlobalNorm(g);
  rec.accepted = std::isfinite(rec.grad_norm) && (!cfg_.grad_tracker || tracker_.Update(rec.grad_norm));
  if (rec.accepted) {
    if (rec.grad_norm > cfg_.clip_norm) autograd::ScaleInPlace(g, cfg_.clip_norm / rec.grad_norm);
    adam_.Step(params_, g, rec.lr);
  }
  ++step_;
  return rec;
}

void Trainer::Run(std::span<const Example> data, std::ostream* log,
                  const std::filesystem::path& ckpt_dir,
                  const std::function<void(const StepRecord&)>& on_step) {
  while (!done()) {
    const StepRecord rec = TrainStep(data);
    if (log) *log << rec.ToJson().dump() << '\n';
    if (on_step) on_step(rec);
    if (!ckpt_dir.empty() && cfg_.checkpoint_every && step_ % cfg_.checkpoint_every == 0 && !done()) {
      Save(ckpt_dir / ("step-" + std::to_string(step_)));
    }
  }
  if (log) log->flush();
  if (!ckpt_dir.empty()) Save(ckpt_dir / "final");
}

void Trainer::Save(const std::filesystem::path& stem) const {
  if (stem.has_parent_path()) std::filesystem::create_directories(stem.parent_path());
  nlohmann::json meta = {{"train_config", cfg_.ToJson()},
                         {"trainer", {{"step", step_}, {"tracker", tracker_.ToJson()},
                                      {"adam_steps", adam_.steps()}}}};
  model::SaveModel(stem, model_cfg_, params_, meta);
  autograd::SaveCheckpoint(WithSuffix(stem, ".adam_m"), adam_.first_moment());
  autograd::SaveCheckpoint(WithSuffix(stem, ".adam_v"), adam_.second_moment());
}

Trainer Trainer::Resume(const std::filesystem::path& stem, const wordpiece::Vocab* vocab) {
  model::LoadedModel lm = model::LoadModel(stem);
  if (!lm.metadata.contains("train_config") || !lm.metadata.contains("trainer")) {
    throw InputError("checkpoint " + stem.string() + " has no trainer state");
  }
  try {
    Trainer t(lm.config, TrainConfig::FromJson(lm.metadata["train_config"]), std::move(lm.params), vocab);
    const auto& st = lm.metadata["trainer"];
    t.step_ = st.at("step").get<std::size_t>();
    t.tracker_.FromJson(st.at("tracker"));
    t.adam_.Restore(autograd::LoadCheckpoint(WithSuffix(stem, ".adam_m")).params,
                    autograd::LoadCheckpoint(WithSuffix(stem, ".adam_v")).params,
                    st.at("adam_steps").get<std::size_t>());
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw InputError("checkpoint " + stem.string() + ": " + e.what());
  }
}

double Trainer::EvaluateLoss(std::span<const Example> data) const {
  if (data.empty()) return 0.0;
  double total = 0.0;
  for (const auto& ex : data) {
    Tape tape;
    model::BoundModel m(tape, model_cfg_, params_, false);
    const auto enc = m.Encode(ex.features);
    total += SmoothedCrossEntropy(m.TeacherForcedLogits(enc, ex.tokens), ex.tokens, cfg_.label_smoothing)
                 .value()
                 .item();
  }
  return total / static_cast<double>(data.size());
}

}  // namespace las::training
