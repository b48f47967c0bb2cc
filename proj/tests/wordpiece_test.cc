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

#include <cmath>
#include <filesystem>
#include <map>
#include <random>

#include <gtest/gtest.h>

#include "las/error.h"
#include "las/utf8.h"
#include "las/wordpiece.h"

namespace las::wordpiece {
namespace {

std::vector<int> Ids(const Vocab& v, const std::vector<std::string>& pieces) {
  std::vector<int> ids;
  for (const auto& p : pieces) ids.push_back(v.id(p).value());
  return ids;
}

Vocab SmallVocab(std::vector<std::string> extra) {
  std::vector<std::string> p = ReservedPieces();
  p.insert(p.end(), extra.begin(), extra.end());
  return Vocab::FromPieces(p);
}

// Oracle: segment every corpus word with the vocab and score the unigram
// maximum-likelihood model directly from piece counts.
double CorpusLogLikelihood(const std::vector<std::string>& corpus, const Vocab& v) {
  std::map<int, double> counts;
  double total = 0.0;
  for (const auto& s : corpus) {
    auto seq = Segment(s, v);
    seq.ids.pop_back();
    for (int id : seq.ids) {
      counts[id] += 1.0;
      total += 1.0;
    }
  }
  double l = 0.0;
  for (const auto& [id, c] : counts) l += c * std::log(c / total);
  return l;
}

std::vector<std::string> RandomCorpus(std::uint64_t seed, int sentences) {
  std::mt19937_64 rng(seed);
  const std::vector<std::string> words = {"one", "two", "three", "four", "five", "seven",
                                          "eight", "nine", "zero", "oh", "seventeen", "nineteen"};
  std::uniform_int_distribution<std::size_t> pick(0, words.size() - 1), len(1, 6);
  std::vector<std::string> out;
  for (int i = 0; i < sentences; ++i) {
    std::vector<std::string> s;
    for (std::size_t k = len(rng); k > 0; --k) s.push_back(words[pick(rng)]);
    out.push_back(text::JoinWords(s));
  }
  return out;
}

TEST(WordpieceTrainTest, RepeatedWordMergesIntoOnePiece) {
  const std::vector<std::string> corpus = {"aa aa aa"};
  const TrainResult r = TrainWordpieces(corpus, 7);
  ASSERT_TRUE(r.vocab.id("▁aa").has_value());
  EXPECT_EQ(r.merges, 1u);
  // Before: 3 x ▁a, 3 x a. After: 3 x ▁aa.
  EXPECT_NEAR(r.log_likelihood.front(), 6.0 * std::log(0.5), 1e-12);
  EXPECT_NEAR(r.log_likelihood.back(), 0.0, 1e-12);
  EXPECT_EQ(Segment("aa", r.vocab).ids, Ids(r.vocab, {"▁aa", "<eos>"}));
}

TEST(WordpieceTrainTest, SingleCharacterCorpusKeepsOnlyCharacters) {
  const std::vector<std::string> corpus = {"a a a a"};
  const TrainResult r = TrainWordpieces(corpus, 100);
  EXPECT_EQ(r.vocab.pieces(), (std::vector<std::string>{"<sos>", "<eos>", "▁<unk>", "<unk>", "▁a", "a"}));
  EXPECT_EQ(r.merges, 0u);
}

TEST(WordpieceTrainTest, TooSmallTargetIsConfigError) {
  const std::vector<std::string> corpus = {"abc"};
  EXPECT_THROW(TrainWordpieces(corpus, 9), ConfigError);
  EXPECT_NO_THROW(TrainWordpieces(corpus, 10));
  EXPECT_THROW(TrainWordpieces(std::vector<std::string>{"  "}, 100), ConfigError);
}

// Properties over random corpora: size bound, monotone likelihood that
// matches a from-scratch recount, and lossless round trips.
TEST(WordpieceTrainTest, PropertiesOnRandomCorpora) {
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    const auto corpus = RandomCorpus(seed, 60);
    for (std::size_t target : {40u, 60u, 120u}) {
      const TrainResult r = TrainWordpieces(corpus, target);
      EXPECT_LE(r.vocab.size(), target);
      ASSERT_EQ(r.log_likelihood.size(), r.merges + 1);
      for (std::size_t i = 1; i < r.log_likelihood.size(); ++i) {
        EXPECT_GT(r.log_likelihood[i], r.log_likelihood[i - 1]);
      }
      for (const auto& s : corpus) {
        const TokenSequence seq = Segment(s, r.vocab);
        EXPECT_EQ(seq.unknown_chars, 0u);
        const DetokenizeResult d = Detokenize(seq.ids, r.vocab);
        EXPECT_FALSE(d.malformed);
        EXPECT_EQ(d.text, s);
      }
    }
  }
}

TEST(WordpieceTrainTest, LikelihoodTrackMatchesRecountWhenSegmentationAgrees) {
  // One word type: greedy longest match reproduces the training segmentation.
  const std::vector<std::string> corpus = {"abcabc abcabc", "abcabc"};
  const TrainResult r = TrainWordpieces(corpus, 40);
  EXPECT_NEAR(r.log_likelihood.back(), CorpusLogLikelihood(corpus, r.vocab), 1e-9);
}

TEST(WordpieceTrainTest, Deterministic) {
  const auto corpus = RandomCorpus(9, 40);
  EXPECT_EQ(TrainWordpieces(corpus, 50).vocab.pieces(), TrainWordpieces(corpus, 50).vocab.pieces());
}

TEST(SegmentTest, GreedyLongestMatch) {
  const Vocab v = SmallVocab({"▁a", "▁b", "▁ab", "a", "b"});
  EXPECT_EQ(Segment("aba", v).ids, Ids(v, {"▁ab", "a", "<eos>"}));
  EXPECT_EQ(Segment("", v).ids, std::vector<int>{kEosId});
  EXPECT_EQ(Segment("   ", v).ids, std::vector<int>{kEosId});
}

TEST(SegmentTest, UnknownCharactersAreFlagged) {
  const Vocab v = SmallVocab({"▁a", "a"});
  const TokenSequence s = Segment("xa ax", v);
  EXPECT_EQ(s.ids, (std::vector<int>{kUnkBeginId, v.id("a").value(), v.id("▁a").value(), kUnkId, kEosId}));
  EXPECT_EQ(s.unknown_chars, 2u);
}

TEST(DetokenizeTest, MarkersBecomeSpaces) {
  const Vocab v = SmallVocab({"▁a", "▁b", "▁ab", "a", "b"});
  const auto d = Detokenize(Ids(v, {"▁ab", "a", "▁b", "<eos>"}), v);
  EXPECT_EQ(d.text, "aba b");
  EXPECT_FALSE(d.malformed);
  EXPECT_TRUE(Detokenize(Ids(v, {"a", "▁b"}), v).malformed);
  EXPECT_THROW(Detokenize(std::vector<int>{99}, v), InputError);
}

TEST(GraphemeVocabTest, HoldsBothFormsOfEachCharacter) {
  const Vocab v = GraphemeVocab("ba é");
  EXPECT_EQ(v.size(), kNumReserved + 6);
  EXPECT_EQ(v.charset(), U"abé");
  EXPECT_EQ(Detokenize(Segment("é ab", v).ids, v).text, "é ab");
}

TEST(VocabTest, FileRoundTripAndValidation) {
  const auto corpus = RandomCorpus(3, 30);
  const Vocab v = TrainWordpieces(corpus, 50).vocab;
  const auto path = std::filesystem::temp_directory_path() / "las_vocab_test.txt";
  v.Save(path);
  const Vocab r = Vocab::Load(path);
  EXPECT_EQ(r.pieces(), v.pieces());
  std::filesystem::remove(path);

  EXPECT_THROW(Vocab::FromPieces({"a", "b"}), InputError);
  EXPECT_THROW(SmallVocab({"▁a", "a", "a"}), InputError);
  EXPECT_THROW(SmallVocab({"▁a"}), InputError);  // internal form missing
  EXPECT_THROW(Vocab::Load("/nonexistent/vocab.txt"), InputError);
}

}  // namespace
}  // namespace las::wordpiece
