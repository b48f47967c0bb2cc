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

#include "las/dataset.h"

#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "las/error.h"
#include "las/utf8.h"

namespace las::data {

std::vector<ManifestRecord> LoadManifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open manifest " + path.string());
  const auto base = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
  std::vector<ManifestRecord> out;
  std::set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::NormalizeWhitespace(line).empty()) continue;
    const std::string where = path.string() + ":" + std::to_string(line_no);
    ManifestRecord r;
    try {
      const auto j = nlohmann::json::parse(line);
      r.id = j.at("id").get<std::string>();
      r.transcript = text::NormalizeWhitespace(j.at("transcript").get<std::string>());
      if (j.contains("audio")) {
        std::filesystem::path a = j["audio"].get<std::string>();
        r.audio = a.is_absolute() ? a : base / a;
      }
      if (j.contains("synth")) {
        frontend::SynthSpec s;
        s.words = j["synth"].at("words").get<std::vector<std::string>>();
        s.seed = j["synth"].at("seed").get<std::uint64_t>();
        r.synth = std::move(s);
      }
    } catch (const nlohmann::json::exception& e) {
      throw InputError(where + ": " + e.what());
    }
    if (r.id.empty()) throw InputError(where + ": empty id");
    if (!seen.insert(r.id).second) throw InputError(where + ": duplicate id " + r.id);
    if (r.transcript.empty()) throw InputError(where + ": empty transcript");
    if (r.audio.has_value() == r.synth.has_value()) {
      throw InputError(where + ": need exactly one of \"audio\" and \"synth\"");
    }
    if (r.audio && !std::filesystem::exists(*r.audio)) {
      throw InputError(where + ": missing audio " + r.audio->string());
    }
    out.push_back(std::move(r));
  }
  return out;
}

void SaveManifest(const std::filesystem::path& path, const std::vector<ManifestRecord>& records) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  for (const auto& r : records) {
    nlohmann::json j = {{"id", r.id}, {"transcript", r.transcript}};
    if (r.audio) j["audio"] = r.audio->string();
    if (r.synth) j["synth"] = {{"words", r.synth->words}, {"seed", r.synth->seed}};
    out << j.dump() << '\n';
  }
  if (!out) throw InputError("cannot write manifest " + path.string());
}

autograd::Tensor RecordFeatures(const ManifestRecord& r, const frontend::SynthOptions& synth) {
  if (r.synth) {
    return frontend::StackDownsample(frontend::SynthesizeUtterance(r.synth->words, r.synth->seed, synth).features)
        .frames;
  }
  if (!r.audio) throw InputError("record " + r.id + " has no source");
  return frontend::ComputeFeatures(frontend::ReadWav(*r.audio)).frames;
}

training::Example MakeExample(const ManifestRecord& r, const wordpiece::Vocab& vocab,
                              const frontend::SynthOptions& synth) {
  training::Example ex;
  ex.id = r.id;
  ex.features = RecordFeatures(r, synth);
  ex.tokens = wordpiece::Segment(r.transcript, vocab).ids;
  ex.transcript = r.transcript;
  return ex;
}

std::vector<training::Example> MakeExamples(const std::vector<ManifestRecord>& records,
                                            const wordpiece::Vocab& vocab,
                                            const frontend::SynthOptions& synth) {
  std::vector<training::Example> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(MakeExample(r, vocab, synth));
  return out;
}

ToyManifests MakeToyManifests(const ToyTaskOptions& opts) {
  auto split = [&](const char* name, std::size_t count, std::uint64_t salt) {
    std::vector<ManifestRecord> out;
    const auto specs = frontend::MakeDigitSpecs(count, training::MixSeed(opts.seed, salt),
                                                opts.min_words, opts.max_words);
    for (std::size_t i = 0; i < specs.size(); ++i) {
      ManifestRecord r;
      r.id = std::string(name) + "-" + std::to_string(i);
      r.transcript = text::JoinWords(specs[i].words);
      r.synth = specs[i];
      out.push_back(std::move(r));
    }
    return out;
  };
  return {split("train", opts.train, 1), split("dev", opts.dev, 2), split("test", opts.test, 3)};
}

std::vector<std::string> Transcripts(const std::vector<ManifestRecord>& records) {
  std::vector<std::string> out;
  for (const auto& r : records) out.push_back(r.transcript);
  return out;
}

}  // namespace las::data
