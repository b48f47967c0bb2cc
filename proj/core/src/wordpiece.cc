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

#include "las/wordpiece.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <tuple>

#include "las/error.h"
#include "las/utf8.h"

namespace las::wordpiece {

namespace {

double XLogX(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

bool HasMarker(std::u32string_view s) { return !s.empty() && s.front() == kWordBeginMarker; }

// Working state of the merge trainer. Pieces are code-point strings, with
// the marker prefix for word-initial pieces.
class MergeTrainer {
 public:
  explicit MergeTrainer(std::span<const std::string> corpus) {
    std::map<std::u32string, double> word_counts;
    for (const auto& sentence : corpus) {
      for (const auto& w : text::SplitWords(sentence)) word_counts[text::DecodeUtf8(w)] += 1.0;
    }
    if (word_counts.empty()) throw ConfigError("wordpiece training corpus has no words");
    std::set<char32_t> chars;
    for (const auto& [w, c] : word_counts) chars.insert(w.begin(), w.end());
    if (chars.count(kWordBeginMarker)) {
      throw ConfigError("wordpiece training corpus contains the word-begin marker U+2581");
    }
    charset_.assign(chars.begin(), chars.end());

    for (char32_t ch : charset_) AddPiece(std::u32string{kWordBeginMarker, ch});
    for (char32_t ch : charset_) AddPiece(std::u32string{ch});
    for (const auto& [w, c] : word_counts) {
      Word word{{}, c};
      for (std::size_t i = 0; i < w.size(); ++i) {
        word.pieces.push_back(i == 0 ? Lookup(std::u32string{kWordBeginMarker, w[i]})
                                     : Lookup(std::u32string{w[i]}));
      }
      for (int p : word.pieces) counts_[p] += c;
      total_ += c * static_cast<double>(word.pieces.size());
      words_.push_back(std::move(word));
    }
  }

  const std::u32string& charset() const { return charset_; }
  std::size_t num_pieces() const { return pieces_.size(); }
  const std::vector<std::u32string>& pieces() const { return pieces_; }

  double LogLikelihood() const {
    double l = 0.0;
    for (double c : counts_) l += XLogX(c);
    return l - XLogX(total_);
  }

  struct Candidate {
    int left = -1, right = -1;
    double count = 0.0;
    double gain = 0.0;
  };

  // Best merge by closed-form likelihood gain; ties go to the
  // lexicographically smallest (left, right) strings.
  std::optional<Candidate> BestMerge(bool allow_new_piece) const {
    std::map<std::pair<int, int>, double> pair_counts;
    for (const auto& word : words_) {
      // Non-overlapping occurrences, counted left to right, matching how
      // ApplyMerge rewrites the word.
      std::map<std::pair<int, int>, std::size_t> last;
      for (std::size_t i = 0; i + 1 < word.pieces.size(); ++i) {
        const std::pair<int, int> key{word.pieces[i], word.pieces[i + 1]};
        auto it = last.find(key);
        if (it != last.end() && it->second + 1 == i) continue;
        last[key] = i;
        pair_counts[key] += word.count;
      }
    }
    std::optional<Candidate> best;
    for (const auto& [key, n] : pair_counts) {
      const std::u32string merged = pieces_[key.first] + pieces_[key.second];
      const auto existing = index_.find(merged);
      if (existing == index_.end() && !allow_new_piece) continue;
      const double gain = Gain(key.first, key.second,
                               existing == index_.end() ? -1 : existing->second, n);
      if (!best || gain > best->gain ||
          (gain == best->gain &&
           std::tie(pieces_[key.first], pieces_[key.second]) <
               std::tie(pieces_[best->left], pieces_[best->right]))) {
        best = Candidate{key.first, key.second, n, gain};
      }
    }
    return best;
  }

  // Change in sum(c log c) - C log C when n occurrences of (a, b) merge.
  double Gain(int a, int b, int existing, double n) const {
    const double merged = existing >= 0 ? counts_[existing] : 0.0;
    double delta = XLogX(merged + n) - XLogX(merged);
    if (a == b) {
      delta += XLogX(counts_[a] - 2.0 * n) - XLogX(counts_[a]);
    } else {
      delta += XLogX(counts_[a] - n) - XLogX(counts_[a]);
      delta += XLogX(counts_[b] - n) - XLogX(counts_[b]);
    }
    return delta - (XLogX(total_ - n) - XLogX(total_));
  }

  void ApplyMerge(int a, int b) {
    const std::u32string merged = pieces_[a] + pieces_[b];
    const int m = index_.count(merged) ? index_.at(merged) : AddPiece(merged);
    for (auto& word : words_) {
      std::vector<int> out;
      out.reserve(word.pieces.size());
      for (std::size_t i = 0; i < word.pieces.size(); ++i) {
        if (i + 1 < word.pieces.size() && word.pieces[i] == a && word.pieces[i + 1] == b) {
          out.push_back(m);
          counts_[a] -= word.count;
          counts_[b] -= word.count;
          counts_[m] += word.count;
          total_ -= word.count;
          ++i;
        } else {
          out.push_back(word.pieces[i]);
        }
      }
      word.pieces = std::move(out);
    }
  }

 private:
  struct Word {
    std::vector<int> pieces;
    double count = 0.0;
  };

  int AddPiece(std::u32string s) {
    const int id = static_cast<int>(pieces_.size());
    index_.emplace(s, id);
    pieces_.push_back(std::move(s));
    counts_.push_back(0.0);
    return id;
  }

  int Lookup(const std::u32string& s) const { return index_.at(s); }

  std::u32string charset_;
  std::vector<std::u32string> pieces_;
  std::map<std::u32string, int> index_;
  std::vector<double> counts_;
  std::vector<Word> words_;
  double total_ = 0.0;
};

}  // namespace

const std::vector<std::string>& ReservedPieces() {
  static const std::vector<std::string> reserved = {"<sos>", "<eos>", "▁<unk>", "<unk>"};
  return reserved;
}

Vocab Vocab::FromPieces(std::vector<std::string> pieces) {
  const auto& reserved = ReservedPieces();
  if (pieces.size() < reserved.size() ||
      !std::equal(reserved.begin(), reserved.end(), pieces.begin())) {
    throw InputError("vocab must start with the reserved pieces <sos> <eos> ▁<unk> <unk>");
  }
  Vocab v;
  v.pieces_ = std::move(pieces);
  v.word_begin_.resize(v.pieces_.size(), false);
  std::set<char32_t> begin_chars, internal_chars;
  for (std::size_t i = 0; i < v.pieces_.size(); ++i) {
    const int id = static_cast<int>(i);
    if (!v.index_.emplace(v.pieces_[i], id).second) {
      throw InputError("duplicate vocab piece: " + v.pieces_[i]);
    }
    if (v.pieces_[i].empty()) throw InputError("empty vocab piece at id " + std::to_string(i));
    if (v.pieces_[i].find('\n') != std::string::npos) throw InputError("newline in vocab piece");
    const std::u32string cps = text::DecodeUtf8(v.pieces_[i]);
    v.word_begin_[i] = HasMarker(cps);
    if (i < kNumReserved) continue;
    if (v.word_begin_[i]) {
      const std::u32string body = cps.substr(1);
      if (body.empty() || body.find(kWordBeginMarker) != std::u32string::npos) {
        throw InputError("malformed word-initial piece: " + v.pieces_[i]);
      }
      v.begin_.emplace(body, id);
      if (body.size() == 1) begin_chars.insert(body[0]);
      v.max_piece_chars_ = std::max(v.max_piece_chars_, body.size());
    } else {
      if (cps.find(kWordBeginMarker) != std::u32string::npos) {
        throw InputError("marker inside internal piece: " + v.pieces_[i]);
      }
      v.internal_.emplace(cps, id);
      if (cps.size() == 1) internal_chars.insert(cps[0]);
      v.max_piece_chars_ = std::max(v.max_piece_chars_, cps.size());
    }
  }
  if (begin_chars != internal_chars) {
    throw InputError("vocab does not hold every character in both word-initial and internal form");
  }
  v.charset_.assign(internal_chars.begin(), internal_chars.end());
  return v;
}

Vocab Vocab::Load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open vocab " + path.string());
  std::vector<std::string> pieces;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    pieces.push_back(line);
  }
  return FromPieces(std::move(pieces));
}

void Vocab::Save(const std::filesystem::path& path) const {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  for (const auto& p : pieces_) out << p << '\n';
  if (!out) throw InputError("cannot write vocab " + path.string());
}

const std::string& Vocab::piece(int id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= pieces_.size()) {
    throw InputError("token id " + std::to_string(id) + " out of vocab range");
  }
  return pieces_[id];
}

std::optional<int> Vocab::id(std::string_view piece) const {
  auto it = index_.find(std::string(piece));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

bool Vocab::is_word_begin(int id) const {
  piece(id);
  return word_begin_[id];
}

std::optional<int> Vocab::FindBegin(std::u32string_view chars) const {
  auto it = begin_.find(std::u32string(chars));
  if (it == begin_.end()) return std::nullopt;
  return it->second;
}

std::optional<int> Vocab::FindInternal(std::u32string_view chars) const {
  auto it = internal_.find(std::u32string(chars));
  if (it == internal_.end()) return std::nullopt;
  return it->second;
}

TrainResult TrainWordpieces(std::span<const std::string> corpus, std::size_t target_size) {
  MergeTrainer trainer(corpus);
  const std::size_t minimum = 2 * trainer.charset().size() + kNumReserved;
  if (target_size < minimum) {
    throw ConfigError("wordpiece target size " + std::to_string(target_size) +
                      " is below the minimum " + std::to_string(minimum) + " for this charset");
  }
  TrainResult result{GraphemeVocab(trainer.charset()), {trainer.LogLikelihood()}, 0};
  while (true) {
    const bool room = kNumReserved + trainer.num_pieces() < target_size;
    const auto best = trainer.BestMerge(room);
    if (!best || !(best->gain > 0.0)) break;
    trainer.ApplyMerge(best->left, best->right);
    result.log_likelihood.push_back(trainer.LogLikelihood());
    ++result.merges;
  }
  std::vector<std::string> pieces = ReservedPieces();
  for (const auto& p : trainer.pieces()) pieces.push_back(text::EncodeUtf8(p));
  result.vocab = Vocab::FromPieces(std::move(pieces));
  return result;
}

Vocab GraphemeVocab(std::u32string_view charset) {
  std::set<char32_t> chars(charset.begin(), charset.end());
  chars.erase(kWordBeginMarker);
  for (char32_t c : U" \t\n\r\f\v") chars.erase(c);
  std::vector<std::string> pieces = ReservedPieces();
  for (char32_t c : chars) pieces.push_back(text::EncodeUtf8(std::u32string{kWordBeginMarker, c}));
  for (char32_t c : chars) pieces.push_back(text::EncodeUtf8(std::u32string{c}));
  return Vocab::FromPieces(std::move(pieces));
}

Vocab GraphemeVocab(std::string_view charset_utf8) {
  return GraphemeVocab(std::u32string_view(text::DecodeUtf8(charset_utf8)));
}

TokenSequence Segment(std::string_view text, const Vocab& vocab) {
  TokenSequence out;
  for (const auto& word_utf8 : text::SplitWords(text)) {
    const std::u32string word = text::DecodeUtf8(word_utf8);
    std::size_t pos = 0;
    while (pos < word.size()) {
      const bool first = pos == 0;
      const std::size_t longest = std::min(vocab.max_piece_chars(), word.size() - pos);
      std::optional<int> match;
      std::size_t len = longest;
      for (; len >= 1; --len) {
        const std::u32string_view cand(word.data() + pos, len);
        match = first ? vocab.FindBegin(cand) : vocab.FindInternal(cand);
        if (match) break;
      }
      if (!match) {
        match = first ? kUnkBeginId : kUnkId;
        len = 1;
        ++out.unknown_chars;
      }
      out.ids.push_back(*match);
      pos += len;
    }
  }
  out.ids.push_back(kEosId);
  return out;
}

DetokenizeResult Detokenize(std::span<const int> ids, const Vocab& vocab) {
  DetokenizeResult out;
  bool any = false;
  for (int id : ids) {
    if (id == kEosId || id == kSosId) {
      vocab.piece(id);
      continue;
    }
    const std::string& p = vocab.piece(id);
    if (vocab.is_word_begin(id)) {
      if (any) out.text += ' ';
      out.text += p.substr(std::string_view(kWordBeginMarkerUtf8).size());
    } else {
      if (!any) out.malformed = true;
      out.text += p;
    }
    any = true;
  }
  return out;
}

}  // namespace las::wordpiece
