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

// Experiment configuration for the las tool.
//
// A config is one JSON object:
//   {
//     "preset": "E5",
//     "seed": 1,
//     "data":   {"train": "...", "dev": "...", "test": "...", "toy": {...}},
//     "vocab":  {"kind": "grapheme" | "wordpiece", "size": 64},
//     "model":  {ModelConfig fields},
//     "train":  {TrainConfig fields},
//     "decode": {"beam_width": 8, "nbest": 4},
//     "lm":     {"enabled": false, "order": 3}
//   }
// Values are layered preset < config file < command-line flags. Every
// section is optional. "seed" drives parameter init and training; an
// explicit "train.seed" is overwritten by it.

#ifndef LAS_TOOLS_EXPERIMENT_H_
#define LAS_TOOLS_EXPERIMENT_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "las/dataset.h"
#include "las/decoding.h"
#include "las/model.h"
#include "las/training.h"

namespace las::tools {

struct PresetInfo {
  std::string id;
  std::string description;
};

// E1..E8 in ladder order.
const std::vector<PresetInfo>& Presets();
// Full config object for a preset; ConfigError for unknown names.
nlohmann::json PresetJson(const std::string& id);

struct VocabSpec {
  std::string kind = "grapheme";
  std::size_t size = 64;  // wordpiece only
};

struct DataSpec {
  std::optional<std::filesystem::path> train, dev, test;
  data::ToyTaskOptions toy;  // used for any split without a manifest
};

struct ExperimentConfig {
  std::string preset;
  std::uint64_t seed = 1;
  DataSpec data;
  VocabSpec vocab;
  nlohmann::json model_overrides = nlohmann::json::object();
  training::TrainConfig train;
  decoding::BeamOptions decode;
  bool lm_enabled = false;
  std::size_t lm_order = 3;

  // Model shape for a vocabulary of the given size.
  model::ModelConfig ModelFor(std::size_t vocab_size) const;
  nlohmann::json ToJson() const;
};

// Merges preset (when non-empty), file and flag layers. ConfigError for
// unknown keys, bad types or inconsistent values.
ExperimentConfig ResolveConfig(const std::string& preset, const nlohmann::json& file,
                               const nlohmann::json& flags);

// ConfigError when the file is unreadable or not a JSON object.
nlohmann::json ReadConfigFile(const std::filesystem::path& path);

// (prev - cur) / prev; 0 when prev is 0.
double RelativeImprovement(double prev, double cur);

}  // namespace las::tools

#endif  // LAS_TOOLS_EXPERIMENT_H_
