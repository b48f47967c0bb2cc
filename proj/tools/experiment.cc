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

#include "experiment.h"

#include <fstream>
#include <set>

#include "las/error.h"

namespace las::tools {

using nlohmann::json;

namespace {

void CheckKeys(const json& j, const std::string& where, const std::set<std::string>& allowed) {
  if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
  for (const auto& [k, _] : j.items()) {
    if (!allowed.count(k)) throw ConfigError("unknown key '" + k + "' in " + where);
  }
}

template <typename T>
T Get(const json& j, const char* key, T fallback, const std::string& where) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(where + "." + key + " has the wrong type");
  }
}

std::optional<std::filesystem::path> GetPath(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  if (!j.at(key).is_string()) throw ConfigError(std::string("data.") + key + " must be a path");
  return std::filesystem::path(j.at(key).get<std::string>());
}

// Shared by every preset; later rungs add one change each.
json BaseJson() {
  return {{"vocab", {{"kind", "grapheme"}}},
          {"model", {{"attention_heads", 1}}},
          {"train", {{"ce_steps", 3000}, {"batch_size", 8}, {"peak_lr", 2e-3}, {"checkpoint_every", 500}}},
          {"decode", {{"beam_width", 8}, {"nbest", 4}}},
          {"lm", {{"enabled", false}, {"order", 3}}}};
}

}  // namespace

const std::vector<PresetInfo>& Presets() {
  static const std::vector<PresetInfo> presets = {
      {"E1", "grapheme"},
      {"E2", "wordpiece"},
      {"E3", "+ multi-head attention"},
      {"E4", "+ sync training"},
      {"E5", "+ scheduled sampling"},
      {"E6", "+ label smoothing"},
      {"E7", "+ MWER"},
      {"E8", "+ LM rescoring"},
  };
  return presets;
}

json PresetJson(const std::string& id) {
  json j = BaseJson();
  const json steps[] = {
      json::object(),
      {{"vocab", {{"kind", "wordpiece"}, {"size", 64}}}},
      {{"model", {{"attention_heads", 4}}}},
      {{"train", {{"replicas", 4}, {"grad_tracker", true}}}},
      {{"train", {{"ss_target_prob", 0.4}, {"ss_ramp_steps", 1000}}}},
      {{"train", {{"label_smoothing", 0.1}}}},
      {{"train", {{"mwer_steps", 300}, {"mwer_nbest", 4}, {"mwer_lambda", 0.01}}}},
      {{"lm", {{"enabled", true}}}},
  };
  const auto& presets = Presets();
  for (std::size_t i = 0; i < presets.size(); ++i) {
    j.merge_patch(steps[i]);
    if (presets[i].id == id) {
      j["preset"] = id;
      return j;
    }
  }
  std::string names;
  for (const auto& p : presets) names += " " + p.id;
  throw ConfigError("unknown preset '" + id + "'; choose one of" + names);
}

model::ModelConfig ExperimentConfig::ModelFor(std::size_t vocab_size) const {
  auto cfg = model::ModelConfig::FromJson(model_overrides, model::DeskConfig(vocab_size));
  cfg.vocab_size = vocab_size;
  cfg.Validate();
  return cfg;
}

json ExperimentConfig::ToJson() const {
  json d = json::object();
  if (data.train) d["train"] = data.train->string();
  if (data.dev) d["dev"] = data.dev->string();
  if (data.test) d["test"] = data.test->string();
  d["toy"] = {{"train", data.toy.train},         {"dev", data.toy.dev},
              {"test", data.toy.test},           {"min_words", data.toy.min_words},
              {"max_words", data.toy.max_words}, {"seed", data.toy.seed}};
  return {{"preset", preset},
          {"seed", seed},
          {"data", d},
          {"vocab", {{"kind", vocab.kind}, {"size", vocab.size}}},
          {"model", model_overrides},
          {"train", train.ToJson()},
          {"decode",
           {{"beam_width", decode.beam_width}, {"nbest", decode.nbest}, {"max_len", decode.max_len}}},
          {"lm", {{"enabled", lm_enabled}, {"order", lm_order}}}};
}

ExperimentConfig ResolveConfig(const std::string& preset, const json& file, const json& flags) {
  CheckKeys(file, "config file", {"preset", "seed", "data", "vocab", "model", "train", "decode", "lm"});
  CheckKeys(flags, "flags", {"preset", "seed", "data", "vocab", "model", "train", "decode", "lm"});
  std::string name = preset;
  if (name.empty() && file.contains("preset")) name = Get<std::string>(file, "preset", "", "config");
  json j = name.empty() ? BaseJson() : PresetJson(name);
  j.merge_patch(file);
  j.merge_patch(flags);
  if (!name.empty()) j["preset"] = name;

  ExperimentConfig c;
  c.preset = Get<std::string>(j, "preset", "", "config");
  c.seed = Get<std::uint64_t>(j, "seed", 1, "config");

  const json d = j.value("data", json::object());
  CheckKeys(d, "data", {"train", "dev", "test", "toy"});
  c.data.train = GetPath(d, "train");
  c.data.dev = GetPath(d, "dev");
  c.data.test = GetPath(d, "test");
  const json toy = d.value("toy", json::object());
  CheckKeys(toy, "data.toy", {"train", "dev", "test", "min_words", "max_words", "seed"});
  c.data.toy.train = Get<std::size_t>(toy, "train", c.data.toy.train, "data.toy");
  c.data.toy.dev = Get<std::size_t>(toy, "dev", c.data.toy.dev, "data.toy");
  c.data.toy.test = Get<std::size_t>(toy, "test", c.data.toy.test, "data.toy");
  c.data.toy.min_words = Get<std::size_t>(toy, "min_words", c.data.toy.min_words, "data.toy");
  c.data.toy.max_words = Get<std::size_t>(toy, "max_words", c.data.toy.max_words, "data.toy");
  c.data.toy.seed = Get<std::uint64_t>(toy, "seed", c.data.toy.seed, "data.toy");
  if (c.data.toy.min_words < 1 || c.data.toy.min_words > c.data.toy.max_words) {
    throw ConfigError("data.toy needs 1 <= min_words <= max_words");
  }

  const json v = j.value("vocab", json::object());
  CheckKeys(v, "vocab", {"kind", "size"});
  c.vocab.kind = Get<std::string>(v, "kind", c.vocab.kind, "vocab");
  c.vocab.size = Get<std::size_t>(v, "size", c.vocab.size, "vocab");
  if (c.vocab.kind != "grapheme" && c.vocab.kind != "wordpiece") {
    throw ConfigError("vocab.kind must be 'grapheme' or 'wordpiece'");
  }

  c.model_overrides = j.value("model", json::object());
  // Shape checks happen once the vocabulary size is known; key and type
  // errors surface now.
  (void)model::ModelConfig::FromJson(c.model_overrides);
  if (c.model_overrides.contains("vocab_size")) {
    throw ConfigError("model.vocab_size is set by the vocabulary");
  }

  json t = j.value("train", json::object());
  if (!t.is_object()) throw ConfigError("train must be a JSON object");
  t["seed"] = c.seed;
  c.train = training::TrainConfig::FromJson(t);
  c.train.Validate();

  const json dec = j.value("decode", json::object());
  CheckKeys(dec, "decode", {"beam_width", "nbest", "max_len"});
  c.decode.beam_width = Get<std::size_t>(dec, "beam_width", c.decode.beam_width, "decode");
  c.decode.nbest = Get<std::size_t>(dec, "nbest", c.decode.nbest, "decode");
  c.decode.max_len = Get<std::size_t>(dec, "max_len", c.decode.max_len, "decode");
  if (c.decode.nbest < 1 || c.decode.beam_width < c.decode.nbest) {
    throw ConfigError("decode needs beam_width >= nbest >= 1");
  }

  const json lm = j.value("lm", json::object());
  CheckKeys(lm, "lm", {"enabled", "order"});
  c.lm_enabled = Get<bool>(lm, "enabled", false, "lm");
  c.lm_order = Get<std::size_t>(lm, "order", 3, "lm");
  if (c.lm_order < 1) throw ConfigError("lm.order must be >= 1");
  return c;
}

json ReadConfigFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  try {
    json j = json::parse(in);
    if (!j.is_object()) throw ConfigError(path.string() + " must hold a JSON object");
    return j;
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

double RelativeImprovement(double prev, double cur) { return prev == 0.0 ? 0.0 : (prev - cur) / prev; }

}  // namespace las::tools
