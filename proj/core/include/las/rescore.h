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

// Second-pass rescoring:
//   score(y) = log P(y|x) + lambda log P_LM(y) + gamma |y|
// with |y| the word count of the detokenized hypothesis.
//
// N-best files hold one hypothesis per line,
//   <utt_id> <rank> <log_prob>\t<text>
// ranks starting at 1, utterances in file order.

#ifndef LAS_RESCORE_H_
#define LAS_RESCORE_H_

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "las/decoding.h"
#include "las/ngram.h"

namespace las::lm {

struct RescoreWeights {
  double lambda = 0.0;
  double gamma = 0.0;
};

struct TextHypothesis {
  std::string text;
  double first_pass = 0.0;  // log P(y|x)
  std::vector<int> tokens;  // optional; breaks ties before text
  double lm_score = 0.0;    // natural log; filled by Rescore
  double combined = 0.0;    // filled by Rescore
};

struct UtteranceNBest {
  std::string id;
  std::vector<TextHypothesis> hyps;  // best first
};

// Sorted by combined score, then first-pass score, then token ids, then
// text; the order of the input list does not matter.
std::vector<TextHypothesis> Rescore(std::vector<TextHypothesis> hyps, const NGramLM& lm,
                                    const RescoreWeights& w);

std::vector<double> DefaultGrid();  // 0, 0.1, ..., 1

struct TuneResult {
  RescoreWeights weights;
  decoding::WerBreakdown dev_wer;
  decoding::WerBreakdown baseline_wer;  // lambda = gamma = 0
};

// Exhaustive grid search minimizing corpus word errors of the reranked
// top-1. Ties go to smaller |lambda|, then smaller |gamma|. (0, 0) is
// always evaluated.
TuneResult TuneWeights(const std::vector<UtteranceNBest>& dev, std::span<const std::string> refs,
                       const NGramLM& lm, std::span<const double> lambda_grid,
                       std::span<const double> gamma_grid);

void WriteNBest(const std::filesystem::path& path, const std::vector<UtteranceNBest>& lists);
// InputError on malformed lines.
std::vector<UtteranceNBest> ReadNBest(const std::filesystem::path& path);

}  // namespace las::lm

#endif  // LAS_RESCORE_H_
