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

// Position-dependent wordpieces.
//
// A word-initial piece carries the prefix marker U+2581 ("▁"); every other
// piece is word-internal. The inventory always holds every training
// character in both forms, so any word over the training charset can be
// segmented.
//
// Reserved ids, fixed on the first lines of every vocab file:
//   0 <sos>   1 <eos>   2 ▁<unk>   3 <unk>
// Characters outside the charset are mapped to ▁<unk> (word-initial) or
// <unk> and counted in TokenSequence::unknown_chars.

#ifndef LAS_WORDPIECE_H_
#define LAS_WORDPIECE_H_

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace las::wordpiece {

inline constexpr char32_t kWordBeginMarker = U'▁';
inline constexpr const char* kWordBeginMarkerUtf8 = "▁";

inline constexpr int kSosId = 0;
inline constexpr int kEosId = 1;
inline constexpr int kUnkBeginId = 2;
inline constexpr int kUnkId = 3;
inline constexpr std::size_t kNumReserved = 4;

const std::vector<std::string>& ReservedPieces();

class Vocab {
 public:
  // Validates reserved lines, uniqueness and the two-form charset coverage.
  // Throws InputError on violation.
  static Vocab FromPieces(std::vector<std::string> pieces);
  static Vocab Load(const std::filesystem::path& path);
  void Save(const std::filesystem::path& path) const;

  std::size_t size() const { return pieces_.size(); }
  const std::string& piece(int id) const;
  std::optional<int> id(std::string_view piece) const;
  const std::vector<std::string>& pieces() const { return pieces_; }
  // Training charset, sorted by code point.
  const std::u32string& charset() const { return charset_; }
  bool is_word_begin(int id) const;

  // Internal lookups for segmentation, keyed by code points without marker.
  std::optional<int> FindBegin(std::u32string_view chars) const;
  std::optional<int> FindInternal(std::u32string_view chars) const;
  std::size_t max_piece_chars() const { return max_piece_chars_; }

 private:
  Vocab() = default;

  std::vector<std::string> pieces_;
  std::unordered_map<std::string, int> index_;
  std::unordered_map<std::u32string, int> begin_;
  std::unordered_map<std::u32string, int> internal_;
  std::vector<bool> word_begin_;
  std::u32string charset_;
  std::size_t max_piece_chars_ = 1;
};

struct TokenSequence {
  std::vector<int> ids;  // ends with kEosId
  std::size_t unknown_chars = 0;
};

struct TrainResult {
  Vocab vocab;
  // Unigram piece log-likelihood of the training corpus (nats), before the
  // first merge and after each accepted merge.
  std::vector<double> log_likelihood;
  std::size_t merges = 0;
};

// Greedy likelihood-driven merges starting from characters. Each iteration
// merges the adjacent pair (within a word) whose merge most increases the
// corpus log-likelihood under a maximum-likelihood unigram piece model.
// Stops at target_size pieces or when no merge helps. ConfigError when
// target_size < 2 * |charset| + kNumReserved or the corpus has no words.
TrainResult TrainWordpieces(std::span<const std::string> corpus, std::size_t target_size);

// Characters plus reserved symbols only.
Vocab GraphemeVocab(std::u32string_view charset);
Vocab GraphemeVocab(std::string_view charset_utf8);

// Per word: longest word-initial piece, then longest internal pieces,
// left to right. Appends kEosId.
TokenSequence Segment(std::string_view text, const Vocab& vocab);

struct DetokenizeResult {
  std::string text;
  bool malformed = false;  // internal piece where a word must start
};
DetokenizeResult Detokenize(std::span<const int> ids, const Vocab& vocab);

}  // namespace las::wordpiece

#endif  // LAS_WORDPIECE_H_
