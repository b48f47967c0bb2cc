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

// Manifests and the synthetic spoken-digit task.
//
// A manifest is JSON Lines, one utterance per line:
//   {"id": "u1", "transcript": "one two", "audio": "wav/u1.wav"}
//   {"id": "u2", "transcript": "oh five", "synth": {"words": ["oh", "five"], "seed": 7}}
// Relative audio paths resolve against the manifest's directory.

#ifndef LAS_DATASET_H_
#define LAS_DATASET_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "las/frontend.h"
#include "las/synth.h"
#include "las/training.h"
#include "las/wordpiece.h"

namespace las::data {

struct ManifestRecord {
  std::string id;
  std::string transcript;
  std::optional<std::filesystem::path> audio;  // absolute after loading
  std::optional<frontend::SynthSpec> synth;
};

// InputError on malformed lines, duplicate ids, empty transcripts, records
// with neither or both sources, or missing audio files.
std::vector<ManifestRecord> LoadManifest(const std::filesystem::path& path);
void SaveManifest(const std::filesystem::path& path, const std::vector<ManifestRecord>& records);

// Stacked features ([T' x 320]) for one record.
autograd::Tensor RecordFeatures(const ManifestRecord& r, const frontend::SynthOptions& synth = {});

training::Example MakeExample(const ManifestRecord& r, const wordpiece::Vocab& vocab,
                              const frontend::SynthOptions& synth = {});
std::vector<training::Example> MakeExamples(const std::vector<ManifestRecord>& records,
                                            const wordpiece::Vocab& vocab,
                                            const frontend::SynthOptions& synth = {});

struct ToyTaskOptions {
  std::size_t train = 2000;
  std::size_t dev = 200;
  std::size_t test = 200;
  std::size_t min_words = 1;
  std::size_t max_words = 5;
  std::uint64_t seed = 1;
};

struct ToyManifests {
  std::vector<ManifestRecord> train, dev, test;
};

// Synthetic records with disjoint seeds per split; ids are
// "<split>-<index>".
ToyManifests MakeToyManifests(const ToyTaskOptions& opts);

std::vector<std::string> Transcripts(const std::vector<ManifestRecord>& records);

}  // namespace las::data

#endif  // LAS_DATASET_H_
