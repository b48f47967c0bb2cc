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

#ifndef LAS_DECODING_H_
#define LAS_DECODING_H_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "las/model.h"

namespace las::decoding {

using model::BoundModel;
using model::EncoderOutput;

struct Hypothesis {
  std::vector<int> tokens;  // ends with eos
  double log_prob = 0.0;    // log P(y|x), no length normalization
};
// Best first.
using NBestList = std::vector<Hypothesis>;

// Orders by score descending, then token ids ascending.
bool BetterHypothesis(const Hypothesis& a, const Hypothesis& b);

struct BeamOptions {
  std::size_t beam_width = 8;
  std::size_t nbest = 1;
  // 0 means 2 x encoder frames.
  std::size_t max_len = 0;
};

// Label-synchronous beam search. Every active hypothesis is expanded by all
// tokens and the best beam_width candidates survive; those ending in eos
// move to the finished set. Search stops once nbest finished hypotheses
// score at least as well as the best active one, or at max_len, where only
// eos may be emitted. ContractError unless beam_width >= nbest >= 1.
NBestList BeamSearch(const BoundModel& m, const EncoderOutput& enc, const BeamOptions& opts);

// Scores every sequence of at most max_len tokens (eos last, eos nowhere
// else) and returns them all, best first. ContractError when the count
// would exceed one million.
NBestList BruteForceDecode(const BoundModel& m, const EncoderOutput& enc, std::size_t max_len);

// Convenience wrapper: binds `params` as constants on a private tape.
NBestList Decode(const model::ModelConfig& cfg, const autograd::ParameterSet& params,
                 const autograd::Tensor& features, const BeamOptions& opts);

struct WerBreakdown {
  std::size_t substitutions = 0;
  std::size_t insertions = 0;
  std::size_t deletions = 0;
  std::size_t ref_words = 0;

  std::size_t errors() const { return substitutions + insertions + deletions; }
  // errors / max(ref_words, 1)
  double rate() const;
  WerBreakdown& operator+=(const WerBreakdown& o);
  friend bool operator==(const WerBreakdown&, const WerBreakdown&) = default;
};

// Unit-cost Levenshtein alignment. On equal-cost paths the backtrace prefers
// substitution (or match), then deletion, then insertion.
WerBreakdown WordEditDistance(std::span<const std::string> ref, std::span<const std::string> hyp);
// Splits both sides on whitespace.
WerBreakdown WordEditDistance(const std::string& ref, const std::string& hyp);

// Pools counts over utterances. InputError on a size mismatch.
WerBreakdown CorpusWer(std::span<const std::string> refs, std::span<const std::string> hyps);

}  // namespace las::decoding

#endif  // LAS_DECODING_H_
