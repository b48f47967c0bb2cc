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

// Subcommand implementations behind the `las` binary. Each one writes its
// artifacts to disk and a short human-readable summary to `out`.
//
// Run directory produced by Train:
//   config.json   resolved experiment config
//   vocab.txt     output vocabulary
//   train.jsonl   one record per step
//   ckpt/step-N.* periodic checkpoints, ckpt/final.* at the end

#ifndef LAS_TOOLS_COMMANDS_H_
#define LAS_TOOLS_COMMANDS_H_

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "experiment.h"
#include "las/dataset.h"
#include "las/rescore.h"
#include "las/wordpiece.h"

namespace las::tools {

namespace fs = std::filesystem;

// Manifest if configured, otherwise the toy split. `split` is train, dev
// or test.
std::vector<data::ManifestRecord> LoadSplit(const ExperimentConfig& cfg, const std::string& split);

// Writes train.jsonl, dev.jsonl and test.jsonl.
void MakeToyData(const data::ToyTaskOptions& opts, const fs::path& out_dir, std::ostream& out);

// Features to <out_dir>/feats/<id>.feat and, with a vocabulary, token ids
// to <out_dir>/tokens.txt as "<id>\t<ids...>". Re-running gives identical
// files.
void Prepare(const fs::path& manifest, const fs::path& out_dir, const std::optional<fs::path>& vocab,
             std::ostream& out);

// size 0 builds a grapheme vocabulary.
wordpiece::Vocab BuildVocab(const std::vector<std::string>& transcripts, const VocabSpec& spec);
void WpmTrain(const fs::path& manifest, std::size_t size, const fs::path& vocab_out, std::ostream& out);
// One sentence per line in, one line of pieces (or ids) out.
void WpmEncode(const fs::path& vocab, std::istream& in, std::ostream& out, bool ids);
// One line of ids in, one sentence out.
void WpmDecode(const fs::path& vocab, std::istream& in, std::ostream& out);

void LmTrain(const std::vector<std::string>& sentences, std::size_t order, const fs::path& arpa_out,
             std::ostream& out);

struct TrainOutcome {
  fs::path final_stem;
  std::size_t steps = 0;
  bool resumed = false;
};
// Resumes from the newest checkpoint in <run_dir>/ckpt when `resume` is
// set and one exists; the step log is trimmed to match.
TrainOutcome Train(const ExperimentConfig& cfg, const fs::path& run_dir, bool resume, std::ostream& out);

// N-best lists with detokenized text, in manifest order.
std::vector<lm::UtteranceNBest> DecodeRecords(const fs::path& model_stem, const fs::path& vocab,
                                              const std::vector<data::ManifestRecord>& records,
                                              const decoding::BeamOptions& beam);

// Hypothesis files: "<id>\t<text>" per line.
using HypothesisMap = std::map<std::string, std::string>;
void WriteHypotheses(const fs::path& path, const std::vector<std::pair<std::string, std::string>>& hyps);
HypothesisMap ReadHypotheses(const fs::path& path);
std::vector<std::pair<std::string, std::string>> TopHypotheses(const std::vector<lm::UtteranceNBest>& nbest);

struct RescoreOutcome {
  lm::RescoreWeights weights;
  std::optional<lm::TuneResult> tuning;
  std::vector<std::pair<std::string, std::string>> hyps;
};
// Tunes on dev when `dev` is given (N-best lists plus references),
// otherwise uses `weights`.
RescoreOutcome RescoreLists(const std::vector<lm::UtteranceNBest>& nbest, const lm::NGramLM& lm,
                            const lm::RescoreWeights& weights,
                            const std::vector<lm::UtteranceNBest>* dev_nbest,
                            const std::vector<std::string>* dev_refs);

struct SystemScore {
  std::string name;
  decoding::WerBreakdown wer;
  double werr = 0.0;  // relative to the previous row
};
struct EvalReport {
  std::vector<SystemScore> systems;
  // Per utterance, for the last system.
  std::vector<std::pair<std::string, decoding::WerBreakdown>> utterances;
};
// InputError when a hypothesis file misses a manifest id.
EvalReport Evaluate(const std::vector<data::ManifestRecord>& refs,
                    const std::vector<std::pair<std::string, HypothesisMap>>& systems);
void PrintReport(const EvalReport& report, bool per_utterance, std::ostream& out);

struct LadderRow {
  std::string id, description;
  decoding::WerBreakdown wer;
  double werr = 0.0;
};
// Trains and evaluates each preset on top of `base` (file and flag layers
// shared by all rungs). Rungs whose training setup matches an earlier rung
// reuse its model.
std::vector<LadderRow> Ladder(const std::vector<std::string>& presets, const nlohmann::json& file,
                              const nlohmann::json& flags, const fs::path& out_dir, std::ostream& out);
void PrintLadder(const std::vector<LadderRow>& rows, std::ostream& out);

}  // namespace las::tools

#endif  // LAS_TOOLS_COMMANDS_H_
