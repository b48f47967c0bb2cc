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

#include "las/rescore.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>

#include "las/error.h"
#include "las/utf8.h"

namespace las::lm {

namespace {

bool Ranked(const TextHypothesis& a, const TextHypothesis& b) {
  if (a.combined != b.combined) return a.combined > b.combined;
  if (a.first_pass != b.first_pass) return a.first_pass > b.first_pass;
  if (a.tokens != b.tokens) return a.tokens < b.tokens;
  return a.text < b.text;
}

}  // namespace

std::vector<TextHypothesis> Rescore(std::vector<TextHypothesis> hyps, const NGramLM& lm,
                                    const RescoreWeights& w) {
  for (auto& h : hyps) {
    const auto words = text::SplitWords(h.text);
    h.lm_score = lm.SentenceLogProb(std::span<const std::string>(words));
    h.combined = h.first_pass + w.lambda * h.lm_score + w.gamma * static_cast<double>(words.size());
  }
  std::sort(hyps.begin(), hyps.end(), Ranked);
  return hyps;
}

std::vector<double> DefaultGrid() {
  std::vector<double> g;
  for (int i = 0; i <= 10; ++i) g.push_back(i / 10.0);
  return g;
}

TuneResult TuneWeights(const std::vector<UtteranceNBest>& dev, std::span<const std::string> refs,
                       const NGramLM& lm, std::span<const double> lambda_grid,
                       std::span<const double> gamma_grid) {
  if (dev.size() != refs.size()) throw InputError("tuning: one reference per N-best list");
  // LM scores do not depend on the weights; compute them once.
  std::vector<std::vector<TextHypothesis>> scored;
  for (const auto& u : dev) scored.push_back(Rescore(u.hyps, lm, {}));
  auto evaluate = [&](const RescoreWeights& w) {
    std::vector<std::string> hyps;
    for (const auto& list : scored) {
      std::optional<TextHypothesis> best;
      for (const auto& h : list) {
        TextHypothesis c = h;
        c.combined = h.first_pass + w.lambda * h.lm_score +
                     w.gamma * static_cast<double>(text::SplitWords(h.text).size());
        if (!best || Ranked(c, *best)) best = std::move(c);
      }
      hyps.push_back(best ? best->text : std::string());
    }
    return decoding::CorpusWer(refs, hyps);
  };

  std::vector<double> lambdas(lambda_grid.begin(), lambda_grid.end());
  std::vector<double> gammas(gamma_grid.begin(), gamma_grid.end());
  lambdas.push_back(0.0);
  gammas.push_back(0.0);
  auto by_magnitude = [](double a, double b) {
    return std::abs(a) != std::abs(b) ? std::abs(a) < std::abs(b) : a < b;
  };
  std::sort(lambdas.begin(), lambdas.end(), by_magnitude);
  lambdas.erase(std::unique(lambdas.begin(), lambdas.end()), lambdas.end());
  std::sort(gammas.begin(), gammas.end(), by_magnitude);
  gammas.erase(std::unique(gammas.begin(), gammas.end()), gammas.end());

  TuneResult r;
  r.baseline_wer = evaluate({});
  r.dev_wer = r.baseline_wer;
  // Visiting in order of |lambda| then |gamma| and replacing only on a
  // strict improvement implements the tie rule.
  for (double l : lambdas) {
    for (double g : gammas) {
      const auto wer = evaluate({l, g});
      if (wer.errors() < r.dev_wer.errors()) {
        r.dev_wer = wer;
        r.weights = {l, g};
      }
    }
  }
  return r;
}

void WriteNBest(const std::filesystem::path& path, const std::vector<UtteranceNBest>& lists) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc);
  for (const auto& u : lists) {
    if (u.id.empty() || u.id.find_first_of(" \t\n") != std::string::npos) {
      throw InputError("utterance id '" + u.id + "' cannot be written to an N-best file");
    }
    for (std::size_t r = 0; r < u.hyps.size(); ++r) {
      char score[40];
      std::snprintf(score, sizeof(score), "%.17g", u.hyps[r].first_pass);
      out << u.id << ' ' << r + 1 << ' ' << score << '\t' << u.hyps[r].text << '\n';
    }
  }
  if (!out) throw InputError("cannot write " + path.string());
}

std::vector<UtteranceNBest> ReadNBest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open N-best file " + path.string());
  std::vector<UtteranceNBest> out;
  std::map<std::string, std::size_t> index;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::string where = path.string() + ":" + std::to_string(line_no);
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw InputError(where + ": missing tab before text");
    const auto head = text::SplitWords(line.substr(0, tab));
    if (head.size() != 3) throw InputError(where + ": expected '<id> <rank> <log_prob>'");
    TextHypothesis h;
    std::size_t rank = 0;
    try {
      rank = std::stoul(head[1]);
      h.first_pass = std::stod(head[2]);
    } catch (const std::exception&) {
      throw InputError(where + ": bad rank or score");
    }
    h.text = text::NormalizeWhitespace(line.substr(tab + 1));
    auto [it, fresh] = index.emplace(head[0], out.size());
    if (fresh) out.push_back({head[0], {}});
    auto& list = out[it->second].hyps;
    if (rank != list.size() + 1) throw InputError(where + ": rank out of order");
    list.push_back(std::move(h));
  }
  return out;
}

}  // namespace las::lm
