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

// las: command-line front end. Exit codes: 0 success, 2 configuration
// error (including bad flags), 3 data error, 4 runtime error.

#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "commands.h"
#include "las/error.h"
#include "las/ngram.h"

namespace {

using namespace las;
using namespace las::tools;
using nlohmann::json;

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitRuntime = 4;

// Flags shared by config-driven commands.
struct ConfigFlags {
  std::string config_path;
  std::string preset;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> steps;
  std::optional<std::size_t> mwer_steps;
  std::string train_manifest, dev_manifest, test_manifest;

  void Attach(CLI::App* app) {
    app->add_option("--config", config_path, "JSON experiment config");
    app->add_option("--preset", preset, "preset E1..E8");
    app->add_option("--seed", seed, "seed for init, shuffling and sampling");
    app->add_option("--steps", steps, "cross-entropy steps");
    app->add_option("--mwer-steps", mwer_steps, "MWER fine-tuning steps");
    app->add_option("--train", train_manifest, "training manifest (default: toy task)");
    app->add_option("--dev", dev_manifest, "dev manifest (default: toy task)");
    app->add_option("--test", test_manifest, "test manifest (default: toy task)");
  }

  json File() const { return config_path.empty() ? json::object() : ReadConfigFile(config_path); }

  json Flags() const {
    json j = json::object();
    if (seed) j["seed"] = *seed;
    if (steps) j["train"]["ce_steps"] = *steps;
    if (mwer_steps) j["train"]["mwer_steps"] = *mwer_steps;
    if (!train_manifest.empty()) j["data"]["train"] = train_manifest;
    if (!dev_manifest.empty()) j["data"]["dev"] = dev_manifest;
    if (!test_manifest.empty()) j["data"]["test"] = test_manifest;
    return j;
  }

  ExperimentConfig Resolve() const { return ResolveConfig(preset, File(), Flags()); }
};

std::vector<data::ManifestRecord> Records(const std::string& manifest, const ExperimentConfig& cfg,
                                          const std::string& split) {
  return manifest.empty() ? LoadSplit(cfg, split) : data::LoadManifest(manifest);
}

int Run(int argc, char** argv) {
  CLI::App app{"Listen, attend and spell: desk-scale speech recognition toolkit"};
  app.require_subcommand(1);

  // make-toy
  data::ToyTaskOptions toy;
  std::string toy_out;
  auto* make_toy = app.add_subcommand("make-toy", "write synthetic spoken-digit manifests");
  make_toy->add_option("--out", toy_out, "output directory")->required();
  make_toy->add_option("--train", toy.train, "training utterances");
  make_toy->add_option("--dev", toy.dev, "dev utterances");
  make_toy->add_option("--test", toy.test, "test utterances");
  make_toy->add_option("--max-words", toy.max_words, "longest utterance in words");
  make_toy->add_option("--seed", toy.seed, "task seed");
  make_toy->callback([&] { MakeToyData(toy, toy_out, std::cout); });

  // prepare
  std::string prep_manifest, prep_out, prep_vocab;
  auto* prepare = app.add_subcommand("prepare", "compute features and token ids for a manifest");
  prepare->add_option("--manifest", prep_manifest, "input manifest")->required();
  prepare->add_option("--out", prep_out, "output directory")->required();
  prepare->add_option("--vocab", prep_vocab, "vocabulary for token ids");
  prepare->callback([&] {
    Prepare(prep_manifest, prep_out,
            prep_vocab.empty() ? std::nullopt : std::optional<fs::path>(prep_vocab), std::cout);
  });

  // wpm-train / wpm-encode / wpm-decode
  std::string wpm_manifest, wpm_out, wpm_vocab;
  std::size_t wpm_size = 64;
  bool wpm_ids = false;
  auto* wpm_train = app.add_subcommand("wpm-train", "train a wordpiece vocabulary");
  wpm_train->add_option("--manifest", wpm_manifest, "training manifest")->required();
  wpm_train->add_option("--size", wpm_size, "vocabulary size; 0 for graphemes");
  wpm_train->add_option("--out", wpm_out, "vocabulary file")->required();
  wpm_train->callback([&] { WpmTrain(wpm_manifest, wpm_size, wpm_out, std::cout); });
  auto* wpm_encode = app.add_subcommand("wpm-encode", "segment stdin lines into wordpieces");
  wpm_encode->add_option("--vocab", wpm_vocab, "vocabulary file")->required();
  wpm_encode->add_flag("--ids", wpm_ids, "print ids instead of pieces");
  wpm_encode->callback([&] { WpmEncode(wpm_vocab, std::cin, std::cout, wpm_ids); });
  auto* wpm_decode = app.add_subcommand("wpm-decode", "turn stdin lines of ids back into text");
  wpm_decode->add_option("--vocab", wpm_vocab, "vocabulary file")->required();
  wpm_decode->callback([&] { WpmDecode(wpm_vocab, std::cin, std::cout); });

  // lm-train
  std::string lm_manifest, lm_text, lm_out;
  std::size_t lm_order = 3;
  auto* lm_train = app.add_subcommand("lm-train", "train a Witten-Bell n-gram LM (ARPA output)");
  auto* lm_src = lm_train->add_option("--manifest", lm_manifest, "take transcripts from a manifest");
  lm_train->add_option("--text", lm_text, "one sentence per line")->excludes(lm_src);
  lm_train->add_option("--order", lm_order, "n-gram order");
  lm_train->add_option("--out", lm_out, "ARPA file")->required();
  lm_train->callback([&] {
    std::vector<std::string> sentences;
    if (!lm_text.empty()) {
      std::ifstream in(lm_text);
      if (!in) throw InputError("cannot read " + lm_text);
      for (std::string line; std::getline(in, line);) sentences.push_back(line);
    } else if (!lm_manifest.empty()) {
      sentences = data::Transcripts(data::LoadManifest(lm_manifest));
    } else {
      throw ConfigError("lm-train needs --manifest or --text");
    }
    LmTrain(sentences, lm_order, lm_out, std::cout);
  });

  // train
  ConfigFlags train_flags;
  std::string train_out;
  bool fresh = false;
  auto* train = app.add_subcommand("train", "train a model; resumes from the newest checkpoint");
  train_flags.Attach(train);
  train->add_option("--out", train_out, "run directory")->required();
  train->add_flag("--fresh", fresh, "ignore existing checkpoints");
  train->callback([&] {
    const auto cfg = train_flags.Resolve();
    const auto r = Train(cfg, train_out, !fresh, std::cout);
    std::cout << "final checkpoint " << r.final_stem.string() << " after " << r.steps << " steps\n";
  });

  // decode
  ConfigFlags decode_flags;
  std::string run_dir, model_stem, vocab_path, dec_manifest, nbest_out, hyp_out;
  std::optional<std::size_t> beam, nbest;
  auto* decode = app.add_subcommand("decode", "beam-search decode a manifest");
  decode_flags.Attach(decode);
  decode->add_option("--run", run_dir, "run directory (model and vocabulary)");
  decode->add_option("--model", model_stem, "checkpoint stem");
  decode->add_option("--vocab", vocab_path, "vocabulary file");
  decode->add_option("--manifest", dec_manifest, "manifest (default: configured test split)");
  decode->add_option("--beam", beam, "beam width");
  decode->add_option("--nbest", nbest, "hypotheses kept per utterance");
  decode->add_option("--nbest-out", nbest_out, "N-best file")->required();
  decode->add_option("--hyp-out", hyp_out, "top-1 hypothesis file");
  decode->callback([&] {
    json flags = decode_flags.Flags();
    if (beam) flags["decode"]["beam_width"] = *beam;
    if (nbest) flags["decode"]["nbest"] = *nbest;
    const auto cfg = ResolveConfig(decode_flags.preset, decode_flags.File(), flags);
    if (model_stem.empty() && run_dir.empty()) throw ConfigError("decode needs --run or --model");
    const fs::path stem = model_stem.empty() ? fs::path(run_dir) / "ckpt" / "final" : fs::path(model_stem);
    const fs::path vocab = vocab_path.empty() ? fs::path(run_dir) / "vocab.txt" : fs::path(vocab_path);
    if (vocab.empty() || vocab == "vocab.txt") throw ConfigError("decode needs --vocab with --model");
    const auto lists = DecodeRecords(stem, vocab, Records(dec_manifest, cfg, "test"), cfg.decode);
    lm::WriteNBest(nbest_out, lists);
    if (!hyp_out.empty()) WriteHypotheses(hyp_out, TopHypotheses(lists));
    std::cout << "decoded " << lists.size() << " utterances\n";
  });

  // rescore
  std::string rs_nbest, rs_lm, rs_out, rs_dev_nbest, rs_dev_manifest;
  double rs_lambda = 0.0, rs_gamma = 0.0;
  auto* rescore = app.add_subcommand("rescore", "rerank N-best lists with an n-gram LM");
  rescore->add_option("--nbest", rs_nbest, "N-best file")->required();
  rescore->add_option("--lm", rs_lm, "ARPA LM")->required();
  rescore->add_option("--lambda", rs_lambda, "LM weight");
  rescore->add_option("--gamma", rs_gamma, "word-count reward");
  auto* tune_nbest = rescore->add_option("--tune-nbest", rs_dev_nbest, "dev N-best file for tuning");
  rescore->add_option("--tune-manifest", rs_dev_manifest, "dev references for tuning")->needs(tune_nbest);
  tune_nbest->needs(rescore->get_option("--tune-manifest"));
  rescore->add_option("--out", rs_out, "reranked top-1 hypothesis file")->required();
  rescore->callback([&] {
    const auto lm = lm::NGramLM::LoadArpa(rs_lm);
    const auto lists = lm::ReadNBest(rs_nbest);
    std::vector<lm::UtteranceNBest> dev;
    std::vector<std::string> dev_refs;
    if (!rs_dev_nbest.empty()) {
      const auto records = data::LoadManifest(rs_dev_manifest);
      std::map<std::string, std::string> ref_of;
      for (const auto& r : records) ref_of[r.id] = r.transcript;
      for (auto& u : lm::ReadNBest(rs_dev_nbest)) {
        auto it = ref_of.find(u.id);
        if (it == ref_of.end()) throw InputError("no reference for dev utterance " + u.id);
        dev_refs.push_back(it->second);
        dev.push_back(std::move(u));
      }
    }
    const auto r = RescoreLists(lists, lm, {rs_lambda, rs_gamma}, dev.empty() ? nullptr : &dev,
                                dev.empty() ? nullptr : &dev_refs);
    WriteHypotheses(rs_out, r.hyps);
    if (r.tuning) {
      std::cout << "tuned on " << dev.size() << " dev utterances: dev WER "
                << 100.0 * r.tuning->baseline_wer.rate() << "% -> " << 100.0 * r.tuning->dev_wer.rate()
                << "%\n";
    }
    std::cout << "lambda " << r.weights.lambda << " gamma " << r.weights.gamma << "\n";
  });

  // eval
  std::string ev_manifest;
  std::vector<std::string> ev_hyps;
  bool per_utt = false;
  auto* eval = app.add_subcommand("eval", "score hypothesis files against a manifest");
  eval->add_option("--manifest", ev_manifest, "reference manifest")->required();
  eval->add_option("--hyp", ev_hyps, "hypothesis file; repeat for a WERR column")->required();
  eval->add_flag("--per-utterance", per_utt, "print the breakdown for the last system");
  eval->callback([&] {
    std::vector<std::pair<std::string, HypothesisMap>> systems;
    for (const auto& h : ev_hyps) systems.emplace_back(h, ReadHypotheses(h));
    PrintReport(Evaluate(data::LoadManifest(ev_manifest), systems), per_utt, std::cout);
  });

  // ladder
  ConfigFlags ladder_flags;
  std::string ladder_out;
  std::vector<std::string> ladder_presets;
  auto* ladder = app.add_subcommand("ladder", "run the E1..E8 preset ladder on the toy task");
  ladder_flags.Attach(ladder);
  ladder->add_option("--out", ladder_out, "output directory")->required();
  ladder->add_option("--presets", ladder_presets, "subset of presets, in order");
  ladder->callback([&] {
    std::vector<std::string> ids = ladder_presets;
    if (ids.empty()) {
      for (const auto& p : Presets()) ids.push_back(p.id);
    }
    if (!ladder_flags.preset.empty()) throw ConfigError("ladder takes --presets, not --preset");
    const auto rows = Ladder(ids, ladder_flags.File(), ladder_flags.Flags(), ladder_out, std::cout);
    std::cout << "\n";
    PrintLadder(rows, std::cout);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return Run(argc, argv);
  } catch (const las::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const las::InputError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}
