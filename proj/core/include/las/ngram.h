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

// Word n-gram LM with interpolated Witten-Bell smoothing.
//
//   P(w|h) = (c(h,w) + T(h) P(w|h')) / (c(h) + T(h))
//
// where T(h) counts distinct successors of h and h' drops the oldest word.
// The unigram level interpolates with a uniform distribution over the
// vocabulary (training words, </s>, <unk>). The model is held in backoff
// form, log10 probabilities for seen n-grams plus log10 backoff weights
// T(h) / (c(h) + T(h)), which is exactly what ARPA files store.

#ifndef LAS_NGRAM_H_
#define LAS_NGRAM_H_

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace las::lm {

inline constexpr const char* kSentenceBegin = "<s>";
inline constexpr const char* kSentenceEnd = "</s>";
inline constexpr const char* kUnknownWord = "<unk>";

class NGramLM {
 public:
  // ConfigError when order < 1; InputError on an empty corpus.
  static NGramLM Train(std::span<const std::string> sentences, std::size_t order);
  // InputError on malformed files.
  static NGramLM LoadArpa(const std::filesystem::path& path);
  void SaveArpa(const std::filesystem::path& path) const;

  std::size_t order() const { return order_; }
  // Predictable words: training words, </s> and <unk>; <s> excluded.
  std::vector<std::string> Vocabulary() const;

  // log P(w | history), natural log. Only the last order-1 history words
  // matter; out-of-vocabulary words are <unk>.
  double LogProb(std::span<const std::string> history, const std::string& word) const;
  // Natural-log score of a sentence, </s> included, starting from <s>.
  double SentenceLogProb(std::span<const std::string> words) const;
  double SentenceLogProb(const std::string& sentence) const;

  // Every history the model stores a backoff weight for.
  std::vector<std::vector<std::string>> Contexts() const;

  std::size_t NumNGrams(std::size_t n) const;

  friend bool operator==(const NGramLM&, const NGramLM&) = default;

 private:
  struct Entry {
    double log10_prob = 0.0;
    std::optional<double> log10_backoff;
    friend bool operator==(const Entry&, const Entry&) = default;
  };
  using Key = std::vector<int>;

  int Id(const std::string& w) const;
  double Log10Prob(const int* hist, std::size_t hist_len, int word) const;

  std::size_t order_ = 0;
  std::vector<std::string> words_;
  std::unordered_map<std::string, int> ids_;
  std::vector<std::map<Key, Entry>> grams_;  // grams_[n - 1]
};

}  // namespace las::lm

#endif  // LAS_NGRAM_H_
