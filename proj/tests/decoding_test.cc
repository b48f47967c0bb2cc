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

#include <algorithm>
#include <random>

#include <gtest/gtest.h>

#include "las/decoding.h"
#include "las/error.h"

namespace las::decoding {
namespace {

using autograd::Tape;
using autograd::Tensor;
using model::ModelConfig;

Tensor RandomFeatures(std::size_t t, std::size_t d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  Tensor x({t, d});
  for (double& v : x.data()) v = n(rng);
  return x;
}

autograd::ParameterSet Spread(const ModelConfig& cfg, std::uint64_t seed, double k = 20.0) {
  autograd::ParameterSet p = model::InitParameters(cfg, seed);
  for (std::size_t i = 0; i < p.size(); ++i) {
    for (double& v : p.value(i).data()) v *= k;
  }
  return p;
}

ModelConfig Tiny(std::size_t vocab) {
  ModelConfig c = model::MicroConfig();
  c.vocab_size = vocab;
  c.sos_id = 0;
  c.eos_id = 1;
  return c;
}

TEST(BeamSearchTest, TwoSymbolVocabMatchesEnumeration) {
  const ModelConfig cfg = Tiny(2);
  Tape tape;
  model::BoundModel m(tape, cfg, Spread(cfg, 1), false);
  const auto enc = m.Encode(RandomFeatures(4, 5, 1));
  const NBestList brute = BruteForceDecode(m, enc, 5);
  ASSERT_EQ(brute.size(), 5u);  // 0^k eos, k = 0..4
  const NBestList beam = BeamSearch(m, enc, {.beam_width = 5, .nbest = 5, .max_len = 5});
  ASSERT_EQ(beam.size(), 5u);
  for (std::size_t i = 0; i < 5; ++i) {
    EXPECT_EQ(beam[i].tokens, brute[i].tokens);
    EXPECT_NEAR(beam[i].log_prob, brute[i].log_prob, 1e-9);
  }
}

TEST(BeamSearchTest, WideBeamEqualsBruteForce) {
  const ModelConfig cfg = Tiny(4);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    Tape tape;
    model::BoundModel m(tape, cfg, Spread(cfg, seed), false);
    const auto enc = m.Encode(RandomFeatures(4, 5, seed));
    const NBestList brute = BruteForceDecode(m, enc, 4);
    const NBestList beam = BeamSearch(m, enc, {.beam_width = 256, .nbest = 4, .max_len = 4});
    ASSERT_EQ(beam.size(), 4u);
    for (std::size_t i = 0; i < 4; ++i) {
      EXPECT_EQ(beam[i].tokens, brute[i].tokens) << "seed " << seed << " rank " << i;
      EXPECT_NEAR(beam[i].log_prob, brute[i].log_prob, 1e-9);
    }
    // Brute-force scores agree with the teacher-forced scorer.
    for (std::size_t i = 0; i < 4; ++i) {
      EXPECT_NEAR(m.SeqLogProb(enc, brute[i].tokens).total.value().item(), brute[i].log_prob, 1e-9);
    }
  }
}

TEST(BeamSearchTest, WidthOneIsGreedy) {
  const ModelConfig cfg = Tiny(6);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    Tape tape;
    model::BoundModel m(tape, cfg, Spread(cfg, seed, 5.0), false);
    const auto enc = m.Encode(RandomFeatures(4, 5, seed));
    // Oracle: argmax at each step.
    std::vector<int> greedy;
    auto state = m.InitialState();
    int prev = cfg.sos_id;
    while (greedy.size() < 8) {
      auto out = m.Step(state, enc, prev);
      const auto z = out.logits.value().data();
      int best = static_cast<int>(std::max_element(z.begin(), z.end()) - z.begin());
      if (greedy.size() + 1 == 8) best = cfg.eos_id;
      greedy.push_back(best);
      state = out.state;
      prev = best;
      if (best == cfg.eos_id) break;
    }
    const NBestList beam = BeamSearch(m, enc, {.beam_width = 1, .nbest = 1, .max_len = 8});
    ASSERT_EQ(beam.size(), 1u);
    EXPECT_EQ(beam[0].tokens, greedy);
  }
}

TEST(BeamSearchTest, WiderBeamsDoNotLowerTopScoreOnFixedSeeds) {
  const ModelConfig cfg = Tiny(6);
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    Tape tape;
    model::BoundModel m(tape, cfg, Spread(cfg, seed, 5.0), false);
    const auto enc = m.Encode(RandomFeatures(5, 5, seed));
    double prev = -1e300;
    for (std::size_t w = 1; w <= 16; w *= 2) {
      const double top = BeamSearch(m, enc, {.beam_width = w, .nbest = 1, .max_len = 6})[0].log_prob;
      EXPECT_GE(top, prev - 1e-12) << "seed " << seed << " width " << w;
      prev = top;
    }
  }
}

TEST(BeamSearchTest, FinishedHypothesesEndInEosAndAreSorted) {
  const ModelConfig cfg = Tiny(6);
  Tape tape;
  model::BoundModel m(tape, cfg, Spread(cfg, 3, 5.0), false);
  const auto enc = m.Encode(RandomFeatures(4, 5, 3));
  const NBestList nb = BeamSearch(m, enc, {.beam_width = 8, .nbest = 4, .max_len = 5});
  ASSERT_FALSE(nb.empty());
  for (std::size_t i = 0; i < nb.size(); ++i) {
    EXPECT_EQ(nb[i].tokens.back(), cfg.eos_id);
    EXPECT_EQ(std::count(nb[i].tokens.begin(), nb[i].tokens.end(), cfg.eos_id), 1);
    EXPECT_LE(nb[i].tokens.size(), 5u);
    if (i) EXPECT_GE(nb[i - 1].log_prob, nb[i].log_prob);
  }
  EXPECT_THROW(BeamSearch(m, enc, {.beam_width = 2, .nbest = 3}), ContractError);
  EXPECT_THROW(BruteForceDecode(m, enc, 8), ContractError);
}

// Exhaustive recursion over alignments, no memoization.
std::size_t RecursiveDistance(const std::vector<std::string>& a, std::size_t i,
                              const std::vector<std::string>& b, std::size_t j) {
  if (i == a.size()) return b.size() - j;
  if (j == b.size()) return a.size() - i;
  return std::min({RecursiveDistance(a, i + 1, b, j + 1) + (a[i] == b[j] ? 0 : 1),
                   RecursiveDistance(a, i + 1, b, j) + 1, RecursiveDistance(a, i, b, j + 1) + 1});
}

std::vector<std::string> RandomWords(std::mt19937_64& rng, std::size_t max_len) {
  static const std::vector<std::string> pool = {"a", "b", "c", "d"};
  std::vector<std::string> out(rng() % (max_len + 1));
  for (auto& w : out) w = pool[rng() % pool.size()];
  return out;
}

TEST(WerTest, Examples) {
  EXPECT_EQ(WordEditDistance("a b c", "a b c").errors(), 0u);
  const WerBreakdown w = WordEditDistance("a b c", "a x c");
  EXPECT_EQ(w.substitutions, 1u);
  EXPECT_EQ(w.errors(), 1u);
  EXPECT_DOUBLE_EQ(w.rate(), 1.0 / 3.0);
  EXPECT_EQ(WordEditDistance("a b c", "a c").deletions, 1u);
  EXPECT_EQ(WordEditDistance("a c", "a b c").insertions, 1u);
  EXPECT_EQ(WordEditDistance("", "a b").insertions, 2u);
  EXPECT_EQ(WordEditDistance("", "a b").rate(), 2.0);
  // "a b" vs "b": deletion of a is the only optimal alignment.
  EXPECT_EQ(WordEditDistance("a b", "b").deletions, 1u);
  // "a b" vs "c": sub+del ties with del+sub; substitution first.
  const WerBreakdown t = WordEditDistance("a b", "c");
  EXPECT_EQ(t.substitutions, 1u);
  EXPECT_EQ(t.deletions, 1u);
}

TEST(WerTest, MatchesRecursiveOracleAndSymmetry) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 400; ++trial) {
    const auto a = RandomWords(rng, 8), b = RandomWords(rng, 8), c = RandomWords(rng, 8);
    const WerBreakdown ab = WordEditDistance(a, b), ba = WordEditDistance(b, a);
    EXPECT_EQ(ab.errors(), RecursiveDistance(a, 0, b, 0));
    EXPECT_EQ(ab.errors(), ba.errors());
    EXPECT_EQ(ab.ref_words, a.size());
    EXPECT_EQ(ab.substitutions + ab.deletions + (a.size() - ab.substitutions - ab.deletions),
              a.size());
    EXPECT_EQ(a.size() - ab.deletions + ab.insertions, b.size());
    EXPECT_LE(ab.errors(), WordEditDistance(a, c).errors() + WordEditDistance(c, b).errors());
  }
}

TEST(WerTest, CorpusPoolsCounts) {
  const std::vector<std::string> refs = {"a b c d", "e"};
  const std::vector<std::string> hyps = {"a b c d", "f"};
  const WerBreakdown w = CorpusWer(refs, hyps);
  EXPECT_EQ(w.errors(), 1u);
  EXPECT_EQ(w.ref_words, 5u);
  EXPECT_DOUBLE_EQ(w.rate(), 0.2);  // not the mean of 0 and 1
  EXPECT_EQ(CorpusWer(refs, refs).rate(), 0.0);
  EXPECT_THROW(CorpusWer(refs, std::vector<std::string>{"x"}), InputError);
}

}  // namespace
}  // namespace las::decoding
