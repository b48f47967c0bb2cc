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

#include "las/ngram.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <numbers>
#include <set>
#include <sstream>

#include "las/error.h"
#include "las/utf8.h"

namespace las::lm {

namespace {

constexpr double kNoProb = -99.0;

std::string FormatDouble(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct Counts {
  std::map<std::vector<int>, double> ngram;   // full n-gram -> count
  std::map<std::vector<int>, double> context;  // history -> total successors count
  std::map<std::vector<int>, double> types;    // history -> distinct successors
};

}  // namespace

int NGramLM::Id(const std::string& w) const {
  auto it = ids_.find(w);
  return it == ids_.end() ? ids_.at(kUnknownWord) : it->second;
}

NGramLM NGramLM::Train(std::span<const std::string> sentences, std::size_t order) {
  if (order < 1) throw ConfigError("n-gram order must be >= 1");
  std::vector<std::vector<std::string>> corpus;
  std::set<std::string> vocab;
  for (const auto& s : sentences) {
    auto words = text::SplitWords(s);
    for (const auto& w : words) {
      if (w == kSentenceBegin || w == kSentenceEnd) {
        throw InputError("corpus may not contain the reserved word " + w);
      }
      vocab.insert(w);
    }
    corpus.push_back(std::move(words));
  }
  if (corpus.empty()) throw InputError("n-gram training corpus is empty");

  NGramLM lm;
  lm.order_ = order;
  vocab.insert(kSentenceEnd);
  vocab.insert(kUnknownWord);
  vocab.insert(kSentenceBegin);
  for (const auto& w : vocab) {
    lm.ids_.emplace(w, static_cast<int>(lm.words_.size()));
    lm.words_.push_back(w);
  }
  const int bos = lm.ids_.at(kSentenceBegin);

  std::vector<Counts> counts(order);
  for (const auto& words : corpus) {
    std::vector<int> seq = {bos};
    for (const auto& w : words) seq.push_back(lm.ids_.at(w));
    seq.push_back(lm.ids_.at(kSentenceEnd));
    for (std::size_t i = 1; i < seq.size(); ++i) {
      for (std::size_t n = 1; n <= order && n <= i + 1; ++n) {
        std::vector<int> gram(seq.begin() + static_cast<std::ptrdiff_t>(i + 1 - n),
                              seq.begin() + static_cast<std::ptrdiff_t>(i + 1));
        counts[n - 1].ngram[gram] += 1.0;
      }
    }
  }
  for (std::size_t n = 0; n < order; ++n) {
    for (const auto& [gram, c] : counts[n].ngram) {
      const std::vector<int> hist(gram.begin(), gram.end() - 1);
      counts[n].context[hist] += c;
      counts[n].types[hist] += 1.0;
    }
  }

  // Interpolated probability straight from the counts.
  const auto vocab_size = static_cast<double>(lm.words_.size() - 1);  // <s> is never predicted
  std::function<double(const std::vector<int>&, int)> interp = [&](const std::vector<int>& hist,
                                                                    int w) -> double {
    const double lower = hist.empty() ? 1.0 / vocab_size
                                      : interp(std::vector<int>(hist.begin() + 1, hist.end()), w);
    const Counts& level = counts[hist.size()];
    auto c = level.context.find(hist);
    if (c == level.context.end()) return lower;
    const double t = level.types.at(hist);
    std::vector<int> gram = hist;
    gram.push_back(w);
    auto g = level.ngram.find(gram);
    const double cw = g == level.ngram.end() ? 0.0 : g->second;
    return (cw + t * lower) / (c->second + t);
  };

  lm.grams_.resize(order);
  const double ln10 = std::numbers::ln10;
  // Every word gets a unigram, including those never seen.
  for (int w = 0; w < static_cast<int>(lm.words_.size()); ++w) {
    lm.grams_[0][{w}].log10_prob = w == bos ? kNoProb : std::log(interp({}, w)) / ln10;
  }
  for (std::size_t n = 1; n < order; ++n) {
    for (const auto& [gram, c] : counts[n].ngram) {
      const std::vector<int> hist(gram.begin(), gram.end() - 1);
      lm.grams_[n][gram].log10_prob = std::log(interp(hist, gram.back())) / ln10;
    }
  }
  // Backoff weights for every history that has successors.
  for (std::size_t n = 1; n < order; ++n) {
    for (const auto& [hist, c] : counts[n].context) {
      const double t = counts[n].types.at(hist);
      auto it = lm.grams_[hist.size() - 1].find(hist);
      if (it == lm.grams_[hist.size() - 1].end()) {
        throw ContractError("n-gram history without its own entry");
      }
      it->second.log10_backoff = std::log(t / (c + t)) / ln10;
    }
  }
  return lm;
}

double NGramLM::Log10Prob(const int* hist, std::size_t hist_len, int word) const {
  double bow = 0.0;
  for (std::size_t use = std::min(hist_len, order_ - 1);; --use) {
    Key key(hist + hist_len - use, hist + hist_len);
    key.push_back(word);
    auto it = grams_[use].find(key);
    if (it != grams_[use].end()) return bow + it->second.log10_prob;
    if (use == 0) break;
    const Key h(hist + hist_len - use, hist + hist_len);
    if (auto jt = grams_[use - 1].find(h); jt != grams_[use - 1].end() && jt->second.log10_backoff) {
      bow += *jt->second.log10_backoff;
    }
  }
  return kNoProb;
}

std::vector<std::string> NGramLM::Vocabulary() const {
  std::vector<std::string> out;
  for (const auto& w : words_) {
    if (w != kSentenceBegin) out.push_back(w);
  }
  return out;
}

double NGramLM::LogProb(std::span<const std::string> history, const std::string& word) const {
  std::vector<int> h;
  for (const auto& w : history) h.push_back(Id(w));
  return Log10Prob(h.data(), h.size(), Id(word)) * std::numbers::ln10;
}

double NGramLM::SentenceLogProb(std::span<const std::string> words) const {
  std::vector<int> seq = {Id(kSentenceBegin)};
  double total = 0.0;
  auto add = [&](int w) {
    total += Log10Prob(seq.data(), seq.size(), w);
    seq.push_back(w);
  };
  for (const auto& w : words) add(Id(w));
  add(Id(kSentenceEnd));
  return total * std::numbers::ln10;
}

double NGramLM::SentenceLogProb(const std::string& sentence) const {
  const auto words = text::SplitWords(sentence);
  return SentenceLogProb(std::span<const std::string>(words));
}

std::vector<std::vector<std::string>> NGramLM::Contexts() const {
  std::vector<std::vector<std::string>> out = {{}};
  for (const auto& level : grams_) {
    for (const auto& [key, e] : level) {
      if (!e.log10_backoff) continue;
      std::vector<std::string> h;
      for (int id : key) h.push_back(words_[static_cast<std::size_t>(id)]);
      out.push_back(std::move(h));
    }
  }
  return out;
}

std::size_t NGramLM::NumNGrams(std::size_t n) const {
  return n >= 1 && n <= grams_.size() ? grams_[n - 1].size() : 0;
}

void NGramLM::SaveArpa(const std::filesystem::path& path) const {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  out << "\\data\\\n";
  for (std::size_t n = 1; n <= order_; ++n) out << "ngram " << n << "=" << grams_[n - 1].size() << "\n";
  for (std::size_t n = 1; n <= order_; ++n) {
    out << "\n\\" << n << "-grams:\n";
    // Sort lines by surface form so files are stable across id layouts.
    std::vector<std::pair<std::string, const Entry*>> lines;
    for (const auto& [key, e] : grams_[n - 1]) {
      std::string words;
      for (std::size_t i = 0; i < key.size(); ++i) {
        if (i) words += ' ';
        words += words_[static_cast<std::size_t>(key[i])];
      }
      lines.emplace_back(std::move(words), &e);
    }
    std::sort(lines.begin(), lines.end());
    for (const auto& [words, e] : lines) {
      out << FormatDouble(e->log10_prob) << '\t' << words;
      if (e->log10_backoff) out << '\t' << FormatDouble(*e->log10_backoff);
      out << '\n';
    }
  }
  out << "\n\\end\\\n";
  if (!out) throw InputError("cannot write " + path.string());
}

NGramLM NGramLM::LoadArpa(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open LM " + path.string());
  auto fail = [&](const std::string& m) -> NGramLM { throw InputError(path.string() + ": " + m); };
  std::string line;
  std::vector<std::size_t> declared;
  bool in_data = false, ended = false;
  std::size_t section = 0;
  std::vector<std::vector<std::pair<std::vector<std::string>, Entry>>> raw;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line == "\\data\\") {
      in_data = true;
      continue;
    }
    if (line == "\\end\\") {
      ended = true;
      break;
    }
    if (line.front() == '\\') {
      std::size_t n = 0;
      if (std::sscanf(line.c_str(), "\\%zu-grams:", &n) != 1 || n < 1 || n > declared.size()) {
        return fail("bad section header '" + line + "'");
      }
      section = n;
      in_data = false;
      continue;
    }
    if (in_data) {
      std::size_t n = 0, count = 0;
      if (std::sscanf(line.c_str(), "ngram %zu=%zu", &n, &count) != 2 || n != declared.size() + 1) {
        return fail("bad count line '" + line + "'");
      }
      declared.push_back(count);
      raw.resize(declared.size());
      continue;
    }
    if (section == 0) return fail("n-gram line outside a section");
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, '\t')) fields.push_back(f);
    if (fields.size() < 2 || fields.size() > 3) return fail("bad n-gram line '" + line + "'");
    Entry e;
    try {
      e.log10_prob = std::stod(fields[0]);
      if (fields.size() == 3) e.log10_backoff = std::stod(fields[2]);
    } catch (const std::exception&) {
      return fail("bad number in '" + line + "'");
    }
    auto words = text::SplitWords(fields[1]);
    if (words.size() != section) return fail("wrong word count in '" + line + "'");
    raw[section - 1].emplace_back(std::move(words), e);
  }
  if (!ended || declared.empty()) return fail("missing \\data\\ or \\end\\");
  NGramLM lm;
  lm.order_ = declared.size();
  lm.grams_.resize(lm.order_);
  std::set<std::string> vocab;
  for (std::size_t n = 0; n < raw.size(); ++n) {
    if (raw[n].size() != declared[n]) return fail("section " + std::to_string(n + 1) + " count mismatch");
  }
  for (const auto& [words, e] : raw[0]) vocab.insert(words[0]);
  for (const char* req : {kSentenceBegin, kSentenceEnd, kUnknownWord}) {
    if (!vocab.count(req)) return fail(std::string("vocabulary lacks ") + req);
  }
  for (const auto& w : vocab) {
    lm.ids_.emplace(w, static_cast<int>(lm.words_.size()));
    lm.words_.push_back(w);
  }
  for (std::size_t n = 0; n < raw.size(); ++n) {
    for (const auto& [words, e] : raw[n]) {
      Key key;
      for (const auto& w : words) {
        auto it = lm.ids_.find(w);
        if (it == lm.ids_.end()) return fail("word '" + w + "' missing from unigrams");
        key.push_back(it->second);
      }
      lm.grams_[n][key] = e;
    }
  }
  return lm;
}

}  // namespace las::lm
