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

// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails.
//
//   acceptance            run all twelve
//   acceptance --only 7   run a subset (repeatable)

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "commands.h"
#include "experiment.h"
#include "las/dataset.h"
#include "las/decoding.h"
#include "las/grad_check.h"
#include "las/model.h"
#include "las/ngram.h"
#include "las/ops.h"
#include "las/rescore.h"
#include "las/tape.h"
#include "las/training.h"
#include "las/utf8.h"
#include "las/wordpiece.h"

namespace {

using namespace las;
using autograd::ParameterSet;
using autograd::Tape;
using autograd::Tensor;
using autograd::Var;
using Clock = std::chrono::steady_clock;
namespace fs = std::filesystem;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string Fmt(const char* fmt, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), fmt, v);
  return buf;
}

double Seconds(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

Tensor RandomMatrix(std::size_t r, std::size_t c, std::uint64_t seed, double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, scale);
  Tensor x({r, c});
  for (double& v : x.data()) v = n(rng);
  return x;
}

ParameterSet Scaled(ParameterSet p, double s) {
  for (std::size_t i = 0; i < p.size(); ++i) {
    for (double& v : p.value(i).data()) v *= s;
  }
  return p;
}

class ScratchDir {
 public:
  explicit ScratchDir(const std::string& name) : path_(fs::temp_directory_path() / name) {
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~ScratchDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

std::string Slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

// 1 -------------------------------------------------------------------------

Outcome GradientFidelity() {
  const auto start = Clock::now();
  const model::ModelConfig cfg = model::MicroConfig();
  ParameterSet p = model::InitParameters(cfg, 101);
  const Tensor x = RandomMatrix(4, cfg.input_dim, 102);
  const std::vector<int> ref = {2, 3, 5, 1};
  const std::vector<std::vector<int>> nbest = {{2, 3, 5, 1}, {2, 5, 1}, {4, 4, 3, 1}};
  const std::vector<double> errors = {0.0, 1.0, 2.0};

  auto check = [&](const std::function<Var(model::BoundModel&, const model::EncoderOutput&)>& loss) {
    return autograd::GradCheckParameters(
        [&](Tape& tape, std::span<const Var> bound) {
          model::BoundModel m(tape, cfg, p, std::vector<Var>(bound.begin(), bound.end()));
          return loss(m, m.Encode(x));
        },
        p);
  };
  const auto ce = check([&](model::BoundModel& m, const model::EncoderOutput& enc) {
    return training::SmoothedCrossEntropy(m.TeacherForcedLogits(enc, ref), ref, 0.0);
  });
  const auto smoothed = check([&](model::BoundModel& m, const model::EncoderOutput& enc) {
    return training::SmoothedCrossEntropy(m.TeacherForcedLogits(enc, ref), ref, 0.1);
  });
  const auto mwer = check([&](model::BoundModel& m, const model::EncoderOutput& enc) {
    std::vector<Var> lps;
    for (const auto& h : nbest) lps.push_back(m.SeqLogProb(enc, h).total);
    const Var c = training::SmoothedCrossEntropy(m.TeacherForcedLogits(enc, ref), ref, 0.1);
    return training::MwerLoss(lps, errors, c, 0.01);
  });
  const double secs = Seconds(start);
  const double worst = std::max({ce.max_rel_error, smoothed.max_rel_error, mwer.max_rel_error});
  return {worst < 1e-4 && secs < 120.0,
          "max rel error CE " + Fmt("%.2e", ce.max_rel_error) + ", smoothed CE " +
              Fmt("%.2e", smoothed.max_rel_error) + ", MWER " + Fmt("%.2e", mwer.max_rel_error) +
              " over " + std::to_string(ce.coordinates) + " coordinates (limit 1e-4); " +
              Fmt("%.1f", secs) + " s (limit 120 s)"};
}

// 2 -------------------------------------------------------------------------

Outcome AttentionNormalization() {
  std::size_t calls = 0, violations = 0;
  double worst = 0.0;
  double masked_mass = 0.0;
  for (std::size_t heads : {1u, 4u}) {
    model::ModelConfig cfg = model::MicroConfig();
    cfg.attention_heads = heads;
    const ParameterSet p = Scaled(model::InitParameters(cfg, 200 + heads), 20.0);
    std::mt19937_64 rng(300 + heads);
    for (int trial = 0; trial < 5000; ++trial) {
      const std::size_t t = 1 + rng() % 12;
      std::vector<std::uint8_t> valid(t);
      for (auto& v : valid) v = rng() % 3 != 0;
      valid[rng() % t] = 1;
      Tape tape;
      model::BoundModel m(tape, cfg, p, false);
      const auto enc = m.WrapEncoderStates(tape.Constant(RandomMatrix(t, cfg.encoder_width(), rng(), 2.0)), valid);
      const auto r = m.Attend(tape.Constant(RandomMatrix(1, cfg.dec_units, rng(), 2.0)), enc);
      ++calls;
      bool ok = r.weights.size() == heads;
      for (const Var& w : r.weights) {
        double sum = 0.0;
        for (std::size_t i = 0; i < t; ++i) {
          const double a = w.value().data()[i];
          sum += a;
          if (!valid[i]) {
            masked_mass += std::abs(a);
            ok = ok && a == 0.0;
          }
          ok = ok && a >= 0.0;
        }
        worst = std::max(worst, std::abs(sum - 1.0));
        ok = ok && std::abs(sum - 1.0) <= 1e-6;
      }
      violations += !ok;
    }
  }
  return {violations == 0 && calls == 10000,
          std::to_string(calls) + " calls, " + std::to_string(violations) + " violations; max |sum - 1| " +
              Fmt("%.1e", worst) + " (limit 1e-6); total masked mass " + Fmt("%g", masked_mass)};
}

// 3 -------------------------------------------------------------------------

Outcome MhaReduction() {
  model::ModelConfig cfg = model::MicroConfig();
  cfg.attention_heads = 1;
  const ParameterSet p = Scaled(model::InitParameters(cfg, 400), 20.0);
  std::mt19937_64 rng(401);
  std::size_t equal = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t t = 1 + rng() % 10;
    Tape tape;
    model::BoundModel m(tape, cfg, p, false);
    const auto enc = m.Encode(RandomMatrix(t, cfg.input_dim, rng()));
    const Var q = tape.Constant(RandomMatrix(1, cfg.dec_units, rng()));
    const auto a = m.AttendSingleHead(q, enc);
    const auto b = m.AttendMultiHead(q, enc);
    equal += a.context.value() == b.context.value() && a.weights[0].value() == b.weights[0].value();
  }
  return {equal == 100, std::to_string(equal) + "/100 inputs bit-identical (context and weights)"};
}

// 4 -------------------------------------------------------------------------

Outcome MwerClosedForm() {
  const std::vector<double> lp = {-1.0, -2.0}, w = {0.0, 2.0};
  // Independent scalar evaluation of the first term.
  const double e1 = std::exp(-1.0), e2 = std::exp(-2.0);
  const double p1 = e1 / (e1 + e2), p2 = e2 / (e1 + e2);
  const double mean = (w[0] + w[1]) / 2.0;
  const double scalar = ((w[0] - mean) * p1 + (w[1] - mean) * p2) / 2.0;

  Tape tape;
  const std::vector<Var> vars = {tape.Leaf(Tensor::Scalar(lp[0])), tape.Leaf(Tensor::Scalar(lp[1]))};
  const double loss = training::MwerLoss(vars, w, tape.Leaf(Tensor::Scalar(7.0)), 0.0).value().item();

  Tape t2;
  const std::vector<Var> more = {t2.Leaf(Tensor::Scalar(-0.3)), t2.Leaf(Tensor::Scalar(-2.5)),
                                 t2.Leaf(Tensor::Scalar(-1.1))};
  const std::vector<double> constant = {3.0, 3.0, 3.0};
  const double flat = training::MwerLoss(more, constant, t2.Leaf(Tensor::Scalar(7.0)), 0.0).value().item();

  const bool pass = std::abs(loss - (-0.2311)) <= 1e-4 && std::abs(loss - scalar) <= 1e-12 && flat == 0.0;
  return {pass, "first term " + Fmt("%.6f", loss) + " (target -0.2311 +- 1e-4, scalar oracle " +
                    Fmt("%.6f", scalar) + "); constant errors give " + Fmt("%g", flat)};
}

// 5 -------------------------------------------------------------------------

Outcome Schedules() {
  training::TrainConfig c;
  c.ss_target_prob = 0.4;
  c.ss_ramp_steps = 100000;
  c.peak_lr = 1e-3;
  c.lr_ramp_steps = 1000;
  bool ok = training::SsProbability(0, c) == 0.0 && training::SsProbability(100000, c) == 0.4;
  for (std::size_t s : {100001u, 150000u, 200000u, 1000000u}) ok = ok && training::SsProbability(s, c) == 0.4;
  ok = ok && training::LearningRate(0, c) == 0.0 && training::LearningRate(1000, c) == 1e-3;
  for (std::size_t s : {1001u, 2000u, 100000u}) ok = ok && training::LearningRate(s, c) == 1e-3;
  const bool mid = std::abs(training::SsProbability(50000, c) - 0.2) < 1e-15 &&
                   std::abs(training::LearningRate(500, c) - 5e-4) < 1e-18;
  return {ok && mid, "ss_probability 0 / 0.4 / 0.4 at steps 0 / ramp / 2x ramp; lr 0 / peak / peak; "
                     "midpoints exact to rounding"};
}

// 6 -------------------------------------------------------------------------

Outcome GradientTracker() {
  training::GradTracker t(4.0, 0.99);
  std::vector<bool> accepted;
  for (double n : {1.0, 1.0, 1.0, 100.0}) accepted.push_back(t.Update(n));
  const bool outlier = t.rejected() == 1 && !accepted[3] && accepted[0] && accepted[1] && accepted[2];
  std::size_t constant_rejections = 0;
  for (double norm : {1e-3, 0.5, 1.0, 2.5, 1e3}) {
    training::GradTracker c(4.0, 0.99);
    for (int i = 0; i < 100000; ++i) c.Update(norm);
    constant_rejections += c.rejected();
  }
  return {outlier && constant_rejections == 0,
          "[1,1,1,100] k=4: " + std::to_string(t.rejected()) + " rejection (the 4th: " +
              (accepted[3] ? "no" : "yes") + "); constant streams: " + std::to_string(constant_rejections) +
              " rejections over 5 x 1e5 updates"};
}

// 7 -------------------------------------------------------------------------

// Two-symbol task for a V=4 micro model: tokens 2 and 3, two frames each.
std::vector<training::Example> TwoSymbolTask(std::size_t n, std::uint64_t seed) {
  const Tensor patterns = RandomMatrix(2, 5, 77, 1.0);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 0.3);
  std::vector<training::Example> out;
  for (std::size_t i = 0; i < n; ++i) {
    training::Example ex;
    ex.id = "s" + std::to_string(i);
    const std::size_t len = 1 + rng() % 3;
    for (std::size_t k = 0; k < len; ++k) ex.tokens.push_back(2 + static_cast<int>(rng() % 2));
    ex.features = Tensor({2 * len, 5});
    for (std::size_t k = 0; k < len; ++k) {
      for (std::size_t f = 0; f < 2; ++f) {
        for (std::size_t d = 0; d < 5; ++d) {
          ex.features(2 * k + f, d) = patterns(static_cast<std::size_t>(ex.tokens[k] - 2), d) + noise(rng);
        }
      }
    }
    ex.tokens.push_back(1);
    out.push_back(std::move(ex));
  }
  return out;
}

Outcome OracleDecodeEquivalence() {
  const auto start = Clock::now();
  model::ModelConfig cfg = model::MicroConfig();
  cfg.vocab_size = 4;
  const auto train = TwoSymbolTask(256, 1);
  const auto held = TwoSymbolTask(10, 2);
  training::TrainConfig tc;
  tc.ce_steps = 400;
  tc.batch_size = 8;
  tc.peak_lr = 1e-2;
  training::Trainer trainer(cfg, tc, model::InitParameters(cfg, 5), nullptr);
  const double loss_before = trainer.EvaluateLoss(held);
  trainer.Run(train, nullptr);
  const double loss_after = trainer.EvaluateLoss(held);

  std::size_t matched = 0;
  double worst = 0.0;
  for (const auto& ex : held) {
    Tape tape;
    model::BoundModel m(tape, cfg, trainer.params(), false);
    const auto enc = m.Encode(ex.features);
    const auto brute = decoding::BruteForceDecode(m, enc, 4);
    const auto beam = decoding::BeamSearch(m, enc, {.beam_width = 256, .nbest = 4, .max_len = 4});
    bool same = beam.size() == 4 && brute.size() >= 4;
    for (std::size_t i = 0; same && i < 4; ++i) {
      same = beam[i].tokens == brute[i].tokens;
      worst = std::max(worst, std::abs(beam[i].log_prob - brute[i].log_prob));
    }
    matched += same;
  }
  const double secs = Seconds(start);
  return {matched == held.size() && worst <= 1e-9 && secs < 60.0 && loss_after < loss_before,
          std::to_string(matched) + "/" + std::to_string(held.size()) +
              " held-out inputs with identical top-4; max score gap " + Fmt("%.1e", worst) +
              " (limit 1e-9); held loss " + Fmt("%.3f", loss_before) + " -> " + Fmt("%.3f", loss_after) +
              " after training; " + Fmt("%.1f", secs) + " s (limit 60 s)"};
}

// 8 -------------------------------------------------------------------------

std::size_t RecursiveDistance(const std::vector<std::string>& a, std::size_t i,
                              const std::vector<std::string>& b, std::size_t j) {
  if (i == a.size()) return b.size() - j;
  if (j == b.size()) return a.size() - i;
  const std::size_t sub = RecursiveDistance(a, i + 1, b, j + 1) + (a[i] != b[j]);
  const std::size_t del = RecursiveDistance(a, i + 1, b, j) + 1;
  const std::size_t ins = RecursiveDistance(a, i, b, j + 1) + 1;
  return std::min({sub, del, ins});
}

Outcome EditDistanceOracle() {
  const std::vector<std::string> words = {"oh", "one", "two", "three"};
  std::mt19937_64 rng(8);
  std::size_t agree = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<std::string> ref(rng() % 9), hyp(rng() % 9);
    for (auto& w : ref) w = words[rng() % words.size()];
    for (auto& w : hyp) w = words[rng() % words.size()];
    const auto b = decoding::WordEditDistance(ref, hyp);
    agree += b.errors() == RecursiveDistance(ref, 0, hyp, 0) && b.ref_words == ref.size();
  }
  return {agree == 1000, std::to_string(agree) + "/1000 random pairs (length <= 8) match the recursive oracle"};
}

// 9 -------------------------------------------------------------------------

Outcome WordpieceRoundTrip() {
  const std::u32string letters = U"abcdefghijklmnopqrstuvwxyzéßж";
  std::mt19937_64 rng(9);
  std::vector<std::string> lexicon;
  for (int i = 0; i < 3000; ++i) {
    std::u32string w;
    for (std::size_t k = 1 + rng() % 8; k > 0; --k) w += letters[rng() % letters.size()];
    lexicon.push_back(text::EncodeUtf8(w));
  }
  // Skewed word frequencies so merges have something to find.
  std::vector<double> weights;
  for (std::size_t i = 0; i < lexicon.size(); ++i) weights.push_back(1.0 / static_cast<double>(i + 1));
  std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
  std::vector<std::string> corpus;
  for (int s = 0; s < 10000; ++s) {
    std::string line;
    for (std::size_t k = 1 + rng() % 10; k > 0; --k) line += (line.empty() ? "" : " ") + lexicon[pick(rng)];
    corpus.push_back(line);
  }
  const auto trained = wordpiece::TrainWordpieces(corpus, 400);
  std::size_t exact = 0;
  for (const auto& s : corpus) {
    const auto seq = wordpiece::Segment(s, trained.vocab);
    const auto back = wordpiece::Detokenize(seq.ids, trained.vocab);
    exact += back.text == s && !back.malformed && seq.unknown_chars == 0;
  }
  std::size_t increases = 0;
  const auto& ll = trained.log_likelihood;
  for (std::size_t i = 1; i < ll.size(); ++i) increases += ll[i] > ll[i - 1];
  const bool monotone = increases + 1 == ll.size();
  return {exact == corpus.size() && monotone && trained.merges > 0,
          std::to_string(exact) + "/" + std::to_string(corpus.size()) + " sentences round-trip; " +
              std::to_string(trained.merges) + " merges to " + std::to_string(trained.vocab.size()) +
              " pieces, log-likelihood rises at every merge: " + (monotone ? "yes" : "no") + " (" +
              Fmt("%.1f", ll.front()) + " -> " + Fmt("%.1f", ll.back()) + ")"};
}

// 10 ------------------------------------------------------------------------

decoding::WerBreakdown TestWer(const model::ModelConfig& cfg, const ParameterSet& p,
                               const std::vector<training::Example>& data, const wordpiece::Vocab& vocab) {
  std::vector<std::string> refs, hyps;
  for (const auto& ex : data) {
    const auto nb = decoding::Decode(cfg, p, ex.features, {.beam_width = 4, .nbest = 1});
    refs.push_back(ex.transcript);
    hyps.push_back(wordpiece::Detokenize(nb.front().tokens, vocab).text);
  }
  return decoding::CorpusWer(refs, hyps);
}

// Eq. 2 first term summed over a held batch, with fixed N-best lists scored
// under `p`.
double HeldExpectedErrors(const model::ModelConfig& cfg, const ParameterSet& p,
                          const std::vector<training::Example>& held,
                          const std::vector<training::ScoredNBest>& lists) {
  double total = 0.0;
  for (std::size_t i = 0; i < held.size(); ++i) {
    Tape tape;
    model::BoundModel m(tape, cfg, p, false);
    const auto enc = m.Encode(held[i].features);
    std::vector<double> lps;
    for (const auto& h : lists[i].hyps) lps.push_back(m.SeqLogProb(enc, h.tokens).total.value().item());
    total += training::MwerExpectedErrorTerm(lps, lists[i].word_errors);
  }
  return total;
}

Outcome ToyEndToEnd() {
  const auto start = Clock::now();
  const data::ToyTaskOptions opts;  // 2000 / 200 / 200
  const auto toy = data::MakeToyManifests(opts);
  const auto vocab = wordpiece::GraphemeVocab(std::string_view("abcdefghijklmnopqrstuvwxyz"));
  const auto train = data::MakeExamples(toy.train, vocab);
  const auto dev = data::MakeExamples(toy.dev, vocab);
  const auto test = data::MakeExamples(toy.test, vocab);
  const auto cfg = model::DeskConfig(vocab.size());

  training::TrainConfig ce;
  ce.ce_steps = 3000;
  training::Trainer ce_trainer(cfg, ce, model::InitParameters(cfg, 1), &vocab);
  ce_trainer.Run(train, nullptr);
  const double ce_secs = Seconds(start);
  const auto ce_wer = TestWer(cfg, ce_trainer.params(), test, vocab);

  training::TrainConfig mw;
  mw.ce_steps = 0;
  mw.mwer_steps = 100;
  mw.peak_lr = 2e-4;
  mw.mwer_nbest = 4;
  mw.mwer_lambda = 0.01;
  training::Trainer mwer_trainer(cfg, mw, ce_trainer.params(), &vocab);
  const std::vector<training::Example> held(dev.begin(), dev.begin() + 16);
  std::vector<training::ScoredNBest> lists;
  for (const auto& ex : held) lists.push_back(mwer_trainer.NBestFor(ex));
  const double term_before = HeldExpectedErrors(cfg, ce_trainer.params(), held, lists);
  mwer_trainer.Run(train, nullptr);
  const double term_after = HeldExpectedErrors(cfg, mwer_trainer.params(), held, lists);
  const auto mwer_wer = TestWer(cfg, mwer_trainer.params(), test, vocab);
  const double secs = Seconds(start);

  const bool pass = ce_wer.rate() <= 0.05 && ce_secs < 1800.0 && mwer_wer.rate() <= ce_wer.rate() + 0.005 &&
                    term_after < term_before;
  return {pass, "CE test WER " + Fmt("%.2f", 100 * ce_wer.rate()) + "% after 3000 steps in " +
                    Fmt("%.0f", ce_secs) + " s (limits 5%, 1800 s); after 100 MWER steps " +
                    Fmt("%.2f", 100 * mwer_wer.rate()) + "% (limit +0.5 abs); held-batch expected errors " +
                    Fmt("%.4f", term_before) + " -> " + Fmt("%.4f", term_after) + "; total " +
                    Fmt("%.0f", secs) + " s"};
}

// 11 ------------------------------------------------------------------------

Outcome RescoringSanity() {
  ScratchDir dir("las_acceptance_rescore");
  const nlohmann::json file = {{"train", {{"ce_steps", 400}, {"checkpoint_every", 0}}},
                               {"decode", {{"beam_width", 4}, {"nbest", 4}}}};
  const auto cfg = tools::ResolveConfig("E1", file, {{"seed", 11}});
  std::ostringstream sink;
  const auto run = tools::Train(cfg, dir.path() / "run", false, sink);
  const auto vocab = dir.path() / "run" / "vocab.txt";
  const auto dev_records = tools::LoadSplit(cfg, "dev");
  const auto dev = tools::DecodeRecords(run.final_stem, vocab, dev_records, cfg.decode);
  const auto test = tools::DecodeRecords(run.final_stem, vocab, tools::LoadSplit(cfg, "test"), cfg.decode);
  const auto train_text = data::Transcripts(tools::LoadSplit(cfg, "train"));
  const auto lm = lm::NGramLM::Train(train_text, 3);

  // Identity weights.
  std::size_t identical = 0, total = 0;
  for (const auto* lists : {&dev, &test}) {
    for (const auto& u : *lists) {
      const auto ranked = lm::Rescore(u.hyps, lm, {0.0, 0.0});
      bool same = ranked.size() == u.hyps.size();
      for (std::size_t i = 0; same && i < ranked.size(); ++i) same = ranked[i].text == u.hyps[i].text;
      identical += same;
      ++total;
    }
  }
  // Tuning.
  const auto dev_refs = data::Transcripts(dev_records);
  const auto grid = lm::DefaultGrid();
  const auto tuned = lm::TuneWeights(dev, dev_refs, lm, grid, grid);
  // Normalization for orders 1..5.
  double worst = 0.0;
  std::size_t contexts = 0;
  for (std::size_t order = 1; order <= 5; ++order) {
    const auto m = lm::NGramLM::Train(train_text, order);
    const auto vocab_words = m.Vocabulary();
    for (const auto& h : m.Contexts()) {
      double sum = 0.0;
      for (const auto& w : vocab_words) sum += std::exp(m.LogProb(h, w));
      worst = std::max(worst, std::abs(sum - 1.0));
      ++contexts;
    }
  }
  const bool pass = identical == total && tuned.dev_wer.errors() <= tuned.baseline_wer.errors() && worst <= 1e-6;
  return {pass, std::to_string(identical) + "/" + std::to_string(total) +
                    " N-best lists unchanged at lambda=gamma=0; dev WER " +
                    Fmt("%.2f", 100 * tuned.baseline_wer.rate()) + "% untuned -> " +
                    Fmt("%.2f", 100 * tuned.dev_wer.rate()) + "% tuned (lambda " +
                    Fmt("%g", tuned.weights.lambda) + ", gamma " + Fmt("%g", tuned.weights.gamma) + "); " +
                    std::to_string(contexts) + " LM contexts, max |sum - 1| " + Fmt("%.1e", worst) +
                    " (limit 1e-6)"};
}

// 12 ------------------------------------------------------------------------

Outcome Determinism() {
  ScratchDir dir("las_acceptance_determinism");
  // Every training feature on: wordpieces, 4 heads, replicas, tracker,
  // scheduled sampling, label smoothing and an MWER phase.
  const nlohmann::json file = {
      {"data", {{"toy", {{"train", 48}, {"dev", 4}, {"test", 4}, {"max_words", 3}}}}},
      {"vocab", {{"size", 40}}},
      {"train", {{"ce_steps", 24}, {"mwer_steps", 4}, {"ss_ramp_steps", 10}, {"checkpoint_every", 10}}}};
  const auto cfg = tools::ResolveConfig("E7", file, {{"seed", 12}});
  std::ostringstream sink;
  tools::Train(cfg, dir.path() / "a", false, sink);
  tools::Train(cfg, dir.path() / "b", false, sink);
  std::size_t files = 0, same = 0;
  for (const auto& e : fs::recursive_directory_iterator(dir.path() / "a")) {
    if (!e.is_regular_file()) continue;
    const auto rel = fs::relative(e.path(), dir.path() / "a");
    ++files;
    same += fs::exists(dir.path() / "b" / rel) && Slurp(e.path()) == Slurp(dir.path() / "b" / rel);
  }
  const bool final_same = Slurp(dir.path() / "a/ckpt/final.bin") == Slurp(dir.path() / "b/ckpt/final.bin") &&
                          !Slurp(dir.path() / "a/ckpt/final.bin").empty();
  return {final_same && same == files && files > 0,
          std::to_string(same) + "/" + std::to_string(files) +
              " run files byte-identical across two seeded runs (final checkpoint included)"};
}

struct Criterion {
  int id;
  const char* name;
  Outcome (*run)();
};

const Criterion kCriteria[] = {
    {1, "gradient fidelity", GradientFidelity},
    {2, "attention normalization", AttentionNormalization},
    {3, "multi-head reduction", MhaReduction},
    {4, "MWER closed form", MwerClosedForm},
    {5, "schedules", Schedules},
    {6, "gradient tracker", GradientTracker},
    {7, "oracle decode equivalence", OracleDecodeEquivalence},
    {8, "edit-distance oracle", EditDistanceOracle},
    {9, "wordpiece round trip", WordpieceRoundTrip},
    {10, "toy end-to-end", ToyEndToEnd},
    {11, "rescoring sanity", RescoringSanity},
    {12, "determinism", Determinism},
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  std::vector<int> only;
  app.add_option("--only", only, "criterion number (repeatable)")->check(CLI::Range(1, 12));
  CLI11_PARSE(app, argc, argv);
  const std::set<int> wanted(only.begin(), only.end());

  int failures = 0;
  for (const auto& c : kCriteria) {
    if (!wanted.empty() && !wanted.count(c.id)) continue;
    const auto start = Clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  " << c.id << ". " << c.name << ": " << o.detail << " ["
              << Fmt("%.1f", Seconds(start)) << " s]" << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
