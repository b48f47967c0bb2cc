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

#include "commands.h"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "las/error.h"
#include "las/frontend.h"
#include "las/model.h"
#include "las/ngram.h"
#include "las/training.h"
#include "las/utf8.h"

namespace las::tools {

using nlohmann::json;

namespace {

std::string Format(const char* fmt, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), fmt, v);
  return buf;
}

void WriteText(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  f << text;
  if (!f) throw InputError("cannot write " + path.string());
}

std::string ReadText(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot read " + path.string());
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

// Newest resumable checkpoint stem, if any.
std::optional<fs::path> LatestCheckpoint(const fs::path& ckpt_dir) {
  if (!fs::exists(ckpt_dir)) return std::nullopt;
  if (fs::exists(ckpt_dir / "final.json")) return ckpt_dir / "final";
  std::optional<fs::path> best;
  std::size_t best_step = 0;
  for (const auto& e : fs::directory_iterator(ckpt_dir)) {
    const std::string name = e.path().filename().string();
    if (!name.starts_with("step-") || !name.ends_with(".json")) continue;
    const std::string digits = name.substr(5, name.size() - 10);
    std::size_t step = 0;
    const auto [end, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), step);
    if (ec != std::errc() || end != digits.data() + digits.size()) continue;
    if (!best || step > best_step) {
      best = ckpt_dir / ("step-" + digits);
      best_step = step;
    }
  }
  return best;
}

// Keeps log lines for steps before `step`.
void TrimLog(const fs::path& log, std::size_t step) {
  if (!fs::exists(log)) return;
  std::istringstream in(ReadText(log));
  std::string kept, line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.contains("step")) break;
    if (j["step"].get<std::size_t>() >= step) break;
    kept += line + "\n";
  }
  WriteText(log, kept);
}

std::vector<std::string> Split(const std::string& line) { return text::SplitWords(line); }

}  // namespace

std::vector<data::ManifestRecord> LoadSplit(const ExperimentConfig& cfg, const std::string& split) {
  const std::optional<fs::path>* path = nullptr;
  if (split == "train") path = &cfg.data.train;
  else if (split == "dev") path = &cfg.data.dev;
  else if (split == "test") path = &cfg.data.test;
  else throw ConfigError("unknown split '" + split + "'");
  if (*path) return data::LoadManifest(**path);
  auto toy = data::MakeToyManifests(cfg.data.toy);
  return split == "train" ? toy.train : split == "dev" ? toy.dev : toy.test;
}

void MakeToyData(const data::ToyTaskOptions& opts, const fs::path& out_dir, std::ostream& out) {
  const auto toy = data::MakeToyManifests(opts);
  data::SaveManifest(out_dir / "train.jsonl", toy.train);
  data::SaveManifest(out_dir / "dev.jsonl", toy.dev);
  data::SaveManifest(out_dir / "test.jsonl", toy.test);
  out << "wrote " << toy.train.size() << "/" << toy.dev.size() << "/" << toy.test.size()
      << " train/dev/test utterances to " << out_dir.string() << "\n";
}

void Prepare(const fs::path& manifest, const fs::path& out_dir, const std::optional<fs::path>& vocab_path,
             std::ostream& out) {
  const auto records = data::LoadManifest(manifest);
  std::optional<wordpiece::Vocab> vocab;
  if (vocab_path) vocab = wordpiece::Vocab::Load(*vocab_path);
  fs::create_directories(out_dir / "feats");
  std::string tokens;
  std::size_t frames = 0, unknown = 0;
  for (const auto& r : records) {
    const auto feats = data::RecordFeatures(r);
    frames += feats.rows();
    frontend::WriteFeatureMatrix(out_dir / "feats" / (r.id + ".feat"), feats);
    if (vocab) {
      const auto seq = wordpiece::Segment(r.transcript, *vocab);
      unknown += seq.unknown_chars;
      tokens += r.id + "\t";
      for (std::size_t i = 0; i < seq.ids.size(); ++i) tokens += (i ? " " : "") + std::to_string(seq.ids[i]);
      tokens += "\n";
    }
  }
  if (vocab) WriteText(out_dir / "tokens.txt", tokens);
  out << "prepared " << records.size() << " utterances, " << frames << " stacked frames";
  if (vocab) out << ", " << unknown << " unknown characters";
  out << "\n";
}

wordpiece::Vocab BuildVocab(const std::vector<std::string>& transcripts, const VocabSpec& spec) {
  if (spec.kind == "grapheme") {
    std::string all;
    for (const auto& t : transcripts) all += t + " ";
    return wordpiece::GraphemeVocab(std::string_view(all));
  }
  return wordpiece::TrainWordpieces(transcripts, spec.size).vocab;
}

void WpmTrain(const fs::path& manifest, std::size_t size, const fs::path& vocab_out, std::ostream& out) {
  const auto transcripts = data::Transcripts(data::LoadManifest(manifest));
  wordpiece::Vocab vocab = size == 0 ? BuildVocab(transcripts, {"grapheme", 0})
                                     : BuildVocab(transcripts, {"wordpiece", size});
  vocab.Save(vocab_out);
  out << "vocabulary of " << vocab.size() << " pieces written to " << vocab_out.string() << "\n";
}

void WpmEncode(const fs::path& vocab_path, std::istream& in, std::ostream& out, bool ids) {
  const auto vocab = wordpiece::Vocab::Load(vocab_path);
  std::string line;
  while (std::getline(in, line)) {
    auto seq = wordpiece::Segment(line, vocab);
    seq.ids.pop_back();
    for (std::size_t i = 0; i < seq.ids.size(); ++i) {
      if (i) out << ' ';
      if (ids) out << seq.ids[i];
      else out << vocab.piece(seq.ids[i]);
    }
    out << '\n';
  }
}

void WpmDecode(const fs::path& vocab_path, std::istream& in, std::ostream& out) {
  const auto vocab = wordpiece::Vocab::Load(vocab_path);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::vector<int> ids;
    for (const auto& f : Split(line)) {
      try {
        std::size_t used = 0;
        const int id = std::stoi(f, &used);
        if (used != f.size() || id < 0 || static_cast<std::size_t>(id) >= vocab.size()) throw std::out_of_range(f);
        ids.push_back(id);
      } catch (const std::exception&) {
        throw InputError("line " + std::to_string(line_no) + ": bad token id '" + f + "'");
      }
    }
    out << wordpiece::Detokenize(ids, vocab).text << '\n';
  }
}

void LmTrain(const std::vector<std::string>& sentences, std::size_t order, const fs::path& arpa_out,
             std::ostream& out) {
  const auto lm = lm::NGramLM::Train(sentences, order);
  lm.SaveArpa(arpa_out);
  out << order << "-gram LM over " << sentences.size() << " sentences:";
  for (std::size_t n = 1; n <= order; ++n) out << " " << lm.NumNGrams(n);
  out << " n-grams, written to " << arpa_out.string() << "\n";
}

TrainOutcome Train(const ExperimentConfig& cfg, const fs::path& run_dir, bool resume, std::ostream& out) {
  const fs::path ckpt_dir = run_dir / "ckpt";
  const fs::path log_path = run_dir / "train.jsonl";
  const std::string config_text = cfg.ToJson().dump(2) + "\n";
  const auto records = LoadSplit(cfg, "train");

  TrainOutcome outcome;
  std::optional<fs::path> from = resume ? LatestCheckpoint(ckpt_dir) : std::nullopt;
  if (from) {
    if (!fs::exists(run_dir / "config.json") || ReadText(run_dir / "config.json") != config_text) {
      throw ConfigError("cannot resume " + run_dir.string() +
                        ": its config.json differs from this config (use --fresh to start over)");
    }
  } else {
    if (fs::exists(ckpt_dir)) fs::remove_all(ckpt_dir);
    WriteText(run_dir / "config.json", config_text);
    BuildVocab(data::Transcripts(records), cfg.vocab).Save(run_dir / "vocab.txt");
  }
  const auto vocab = wordpiece::Vocab::Load(run_dir / "vocab.txt");

  std::optional<training::Trainer> trainer;
  if (from) {
    trainer.emplace(training::Trainer::Resume(*from, &vocab));
    TrimLog(log_path, trainer->step());
    outcome.resumed = true;
    out << "resuming " << run_dir.string() << " at step " << trainer->step() << "\n";
  } else {
    const auto mcfg = cfg.ModelFor(vocab.size());
    trainer.emplace(mcfg, cfg.train, model::InitParameters(mcfg, training::MixSeed(cfg.seed, 0x1417)), &vocab);
    WriteText(log_path, "");
  }
  const auto examples = data::MakeExamples(records, vocab);
  std::ofstream log(log_path, std::ios::app);
  const std::size_t total = cfg.train.ce_steps + cfg.train.mwer_steps;
  trainer->Run(examples, &log, ckpt_dir, [&](const training::StepRecord& r) {
    if ((r.step + 1) % 100 == 0 || r.step + 1 == total) {
      out << "step " << r.step + 1 << "/" << total << " " << r.phase << " loss "
          << Format("%.4f", r.loss) << "\n";
      out.flush();
    }
  });
  if (!trainer->done()) throw ContractError("training stopped early");
  outcome.final_stem = ckpt_dir / "final";
  outcome.steps = trainer->step();
  return outcome;
}

std::vector<lm::UtteranceNBest> DecodeRecords(const fs::path& model_stem, const fs::path& vocab_path,
                                              const std::vector<data::ManifestRecord>& records,
                                              const decoding::BeamOptions& beam) {
  const auto loaded = model::LoadModel(model_stem);
  const auto vocab = wordpiece::Vocab::Load(vocab_path);
  if (vocab.size() != loaded.config.vocab_size) {
    throw InputError("vocabulary " + vocab_path.string() + " does not match the model");
  }
  std::vector<lm::UtteranceNBest> out;
  for (const auto& r : records) {
    const auto hyps = decoding::Decode(loaded.config, loaded.params, data::RecordFeatures(r), beam);
    lm::UtteranceNBest u{r.id, {}};
    for (const auto& h : hyps) {
      lm::TextHypothesis t;
      t.text = wordpiece::Detokenize(h.tokens, vocab).text;
      t.first_pass = h.log_prob;
      t.tokens = h.tokens;
      u.hyps.push_back(std::move(t));
    }
    out.push_back(std::move(u));
  }
  return out;
}

void WriteHypotheses(const fs::path& path, const std::vector<std::pair<std::string, std::string>>& hyps) {
  std::string text;
  for (const auto& [id, h] : hyps) text += id + "\t" + h + "\n";
  WriteText(path, text);
}

HypothesisMap ReadHypotheses(const fs::path& path) {
  std::istringstream in(ReadText(path));
  HypothesisMap out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    const std::string id = line.substr(0, tab);
    if (id.empty() || id.find(' ') != std::string::npos) {
      throw InputError(path.string() + ":" + std::to_string(line_no) + ": expected '<id>\\t<text>'");
    }
    const std::string text = tab == std::string::npos ? "" : text::NormalizeWhitespace(line.substr(tab + 1));
    if (!out.emplace(id, text).second) {
      throw InputError(path.string() + ":" + std::to_string(line_no) + ": duplicate id " + id);
    }
  }
  return out;
}

std::vector<std::pair<std::string, std::string>> TopHypotheses(const std::vector<lm::UtteranceNBest>& nbest) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& u : nbest) out.emplace_back(u.id, u.hyps.empty() ? "" : u.hyps.front().text);
  return out;
}

RescoreOutcome RescoreLists(const std::vector<lm::UtteranceNBest>& nbest, const lm::NGramLM& lm,
                            const lm::RescoreWeights& weights,
                            const std::vector<lm::UtteranceNBest>* dev_nbest,
                            const std::vector<std::string>* dev_refs) {
  RescoreOutcome r;
  r.weights = weights;
  if (dev_nbest) {
    const auto grid = lm::DefaultGrid();
    r.tuning = lm::TuneWeights(*dev_nbest, *dev_refs, lm, grid, grid);
    r.weights = r.tuning->weights;
  }
  for (const auto& u : nbest) {
    const auto ranked = lm::Rescore(u.hyps, lm, r.weights);
    r.hyps.emplace_back(u.id, ranked.empty() ? "" : ranked.front().text);
  }
  return r;
}

EvalReport Evaluate(const std::vector<data::ManifestRecord>& refs,
                    const std::vector<std::pair<std::string, HypothesisMap>>& systems) {
  EvalReport report;
  for (std::size_t s = 0; s < systems.size(); ++s) {
    SystemScore score{systems[s].first, {}, 0.0};
    for (const auto& r : refs) {
      auto it = systems[s].second.find(r.id);
      if (it == systems[s].second.end()) {
        throw InputError("system " + systems[s].first + " has no hypothesis for " + r.id);
      }
      const auto b = decoding::WordEditDistance(r.transcript, it->second);
      score.wer += b;
      if (s + 1 == systems.size()) report.utterances.emplace_back(r.id, b);
    }
    if (s > 0) score.werr = RelativeImprovement(report.systems.back().wer.rate(), score.wer.rate());
    report.systems.push_back(std::move(score));
  }
  return report;
}

void PrintReport(const EvalReport& report, bool per_utterance, std::ostream& out) {
  if (per_utterance) {
    out << "utterance\twords\tS\tI\tD\tWER%\n";
    for (const auto& [id, b] : report.utterances) {
      out << id << "\t" << b.ref_words << "\t" << b.substitutions << "\t" << b.insertions << "\t"
          << b.deletions << "\t" << Format("%.2f", 100.0 * b.rate()) << "\n";
    }
    out << "\n";
  }
  out << "system\twords\tS\tI\tD\tWER%\tWERR%\n";
  for (std::size_t i = 0; i < report.systems.size(); ++i) {
    const auto& s = report.systems[i];
    out << s.name << "\t" << s.wer.ref_words << "\t" << s.wer.substitutions << "\t" << s.wer.insertions
        << "\t" << s.wer.deletions << "\t" << Format("%.2f", 100.0 * s.wer.rate()) << "\t"
        << (i == 0 ? std::string("-") : Format("%.1f", 100.0 * s.werr)) << "\n";
  }
}

std::vector<LadderRow> Ladder(const std::vector<std::string>& presets, const json& file, const json& flags,
                              const fs::path& out_dir, std::ostream& out) {
  std::map<std::string, fs::path> trained;  // training setup -> run dir
  std::map<std::string, std::vector<lm::UtteranceNBest>> decoded;
  std::vector<LadderRow> rows;
  json summary = json::array();
  for (const auto& id : presets) {
    const ExperimentConfig cfg = ResolveConfig(id, file, flags);
    LadderRow row;
    row.id = id;
    for (const auto& p : Presets()) {
      if (p.id == id) row.description = p.description;
    }
    json setup = cfg.ToJson();
    setup.erase("preset");
    setup.erase("lm");
    const std::string key = setup.dump();
    fs::path run_dir = out_dir / id;
    if (auto it = trained.find(key); it != trained.end()) {
      run_dir = it->second;
      out << id << ": reusing the model from " << run_dir.string() << "\n";
    } else {
      out << id << ": training in " << run_dir.string() << "\n";
      Train(cfg, run_dir, true, out);
      trained.emplace(key, run_dir);
    }
    const fs::path stem = run_dir / "ckpt" / "final";
    auto decode = [&](const std::string& split) -> const std::vector<lm::UtteranceNBest>& {
      const std::string dkey = run_dir.string() + "|" + split;
      auto it = decoded.find(dkey);
      if (it == decoded.end()) {
        it = decoded.emplace(dkey, DecodeRecords(stem, run_dir / "vocab.txt", LoadSplit(cfg, split), cfg.decode))
                 .first;
      }
      return it->second;
    };
    const auto test_records = LoadSplit(cfg, "test");
    const auto& test_nbest = decode("test");
    std::vector<std::pair<std::string, std::string>> hyps = TopHypotheses(test_nbest);
    json extra = json::object();
    if (cfg.lm_enabled) {
      const auto lm = lm::NGramLM::Train(data::Transcripts(LoadSplit(cfg, "train")), cfg.lm_order);
      lm.SaveArpa(out_dir / id / "lm.arpa");
      const auto dev_refs = data::Transcripts(LoadSplit(cfg, "dev"));
      const auto r = RescoreLists(test_nbest, lm, {}, &decode("dev"), &dev_refs);
      hyps = r.hyps;
      extra = {{"lambda", r.weights.lambda}, {"gamma", r.weights.gamma}};
      out << id << ": tuned lambda " << r.weights.lambda << " gamma " << r.weights.gamma << "\n";
    }
    WriteHypotheses(out_dir / id / "test.hyp", hyps);
    std::vector<std::string> refs, texts;
    for (std::size_t i = 0; i < test_records.size(); ++i) {
      refs.push_back(test_records[i].transcript);
      texts.push_back(hyps[i].second);
    }
    row.wer = decoding::CorpusWer(refs, texts);
    if (!rows.empty()) row.werr = RelativeImprovement(rows.back().wer.rate(), row.wer.rate());
    out << id << ": test WER " << Format("%.2f", 100.0 * row.wer.rate()) << "%\n";
    rows.push_back(row);
    json entry = {{"id", row.id},
                  {"description", row.description},
                  {"wer", row.wer.rate()},
                  {"werr", row.werr},
                  {"errors", row.wer.errors()},
                  {"ref_words", row.wer.ref_words}};
    entry.update(extra);
    summary.push_back(entry);
  }
  WriteText(out_dir / "ladder.json", summary.dump(2) + "\n");
  std::ostringstream table;
  PrintLadder(rows, table);
  WriteText(out_dir / "ladder.txt", table.str());
  return rows;
}

void PrintLadder(const std::vector<LadderRow>& rows, std::ostream& out) {
  out << "Exp-ID\tModel\tWER%\tWERR%\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out << rows[i].id << "\t" << rows[i].description << "\t" << Format("%.2f", 100.0 * rows[i].wer.rate())
        << "\t" << (i == 0 ? std::string("-") : Format("%.1f", 100.0 * rows[i].werr)) << "\n";
  }
}

}  // namespace las::tools
