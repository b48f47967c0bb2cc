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

#include "las/decoding.h"

#include <algorithm>
#include <cmath>
#include <functional>

#include "las/error.h"
#include "las/utf8.h"

namespace las::decoding {

namespace {

using model::DecoderState;

std::vector<double> LogSoftmaxRow(const autograd::Tensor& logits) {
  const auto z = logits.data();
  const double mx = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (double v : z) sum += std::exp(v - mx);
  const double log_z = mx + std::log(sum);
  std::vector<double> out(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) out[i] = z[i] - log_z;
  return out;
}

struct Active {
  Hypothesis hyp;
  DecoderState state;
};

struct Candidate {
  std::size_t parent;
  int token;
  double score;
  const std::vector<int>* prefix;
};

bool BetterCandidate(const Candidate& a, const Candidate& b) {
  if (a.score != b.score) return a.score > b.score;
  const auto& pa = *a.prefix;
  const auto& pb = *b.prefix;
  // Compare prefix + token lexicographically.
  const std::size_t n = std::min(pa.size(), pb.size());
  for (std::size_t i = 0; i < n; ++i) {
    if (pa[i] != pb[i]) return pa[i] < pb[i];
  }
  if (pa.size() != pb.size()) {
    const int na = pa.size() > n ? pa[n] : a.token;
    const int nb = pb.size() > n ? pb[n] : b.token;
    if (na != nb) return na < nb;
    return pa.size() < pb.size();
  }
  return a.token < b.token;
}

}  // namespace

bool BetterHypothesis(const Hypothesis& a, const Hypothesis& b) {
  if (a.log_prob != b.log_prob) return a.log_prob > b.log_prob;
  return a.tokens < b.tokens;
}

NBestList BeamSearch(const BoundModel& m, const EncoderOutput& enc, const BeamOptions& opts) {
  if (opts.nbest < 1 || opts.beam_width < opts.nbest) {
    throw ContractError("beam search needs beam_width >= nbest >= 1");
  }
  const auto& cfg = m.config();
  const std::size_t max_len = opts.max_len ? opts.max_len : 2 * enc.frames();
  const int vocab = static_cast<int>(cfg.vocab_size);

  std::vector<Active> active;
  active.push_back({{}, m.InitialState()});
  NBestList finished;

  for (std::size_t len = 1; len <= max_len && !active.empty(); ++len) {
    const bool last = len == max_len;
    std::vector<Candidate> candidates;
    std::vector<DecoderState> next_states;
    for (std::size_t a = 0; a < active.size(); ++a) {
      const auto& h = active[a].hyp;
      const int prev = h.tokens.empty() ? cfg.sos_id : h.tokens.back();
      model::StepOutput out = m.Step(active[a].state, enc, prev);
      const std::vector<double> lp = LogSoftmaxRow(out.logits.value());
      next_states.push_back(std::move(out.state));
      for (int v = 0; v < vocab; ++v) {
        if (last && v != cfg.eos_id) continue;
        candidates.push_back({a, v, h.log_prob + lp[static_cast<std::size_t>(v)], &h.tokens});
      }
    }
    const std::size_t keep = std::min(opts.beam_width, candidates.size());
    std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(keep),
                      candidates.end(), BetterCandidate);
    std::vector<Active> survivors;
    for (std::size_t k = 0; k < keep; ++k) {
      const Candidate& c = candidates[k];
      Hypothesis h{*c.prefix, c.score};
      h.tokens.push_back(c.token);
      if (c.token == cfg.eos_id) {
        finished.push_back(std::move(h));
      } else {
        survivors.push_back({std::move(h), next_states[c.parent]});
      }
    }
    active = std::move(survivors);
    std::sort(finished.begin(), finished.end(), BetterHypothesis);
    // Extensions never raise a score, so once nbest finished hypotheses beat
    // every active one the answer is fixed.
    if (finished.size() >= opts.nbest && !active.empty() &&
        finished[opts.nbest - 1].log_prob >= active.front().hyp.log_prob) {
      break;
    }
  }
  if (finished.size() > opts.nbest) finished.resize(opts.nbest);
  return finished;
}

NBestList BruteForceDecode(const BoundModel& m, const EncoderOutput& enc, std::size_t max_len) {
  const auto& cfg = m.config();
  if (max_len < 1) throw ContractError("brute-force decode needs max_len >= 1");
  double count = std::pow(static_cast<double>(cfg.vocab_size), static_cast<double>(max_len));
  if (count > 1e6) throw ContractError("brute-force decode limited to V^max_len <= 1e6");

  NBestList all;
  std::vector<int> prefix;
  std::function<void(const DecoderState&, double)> walk = [&](const DecoderState& state,
                                                             double score) {
    const int prev = prefix.empty() ? cfg.sos_id : prefix.back();
    model::StepOutput out = m.Step(state, enc, prev);
    const std::vector<double> lp = LogSoftmaxRow(out.logits.value());
    Hypothesis done{prefix, score + lp[static_cast<std::size_t>(cfg.eos_id)]};
    done.tokens.push_back(cfg.eos_id);
    all.push_back(std::move(done));
    if (prefix.size() + 1 >= max_len) return;
    for (int v = 0; v < static_cast<int>(cfg.vocab_size); ++v) {
      if (v == cfg.eos_id) continue;
      prefix.push_back(v);
      walk(out.state, score + lp[static_cast<std::size_t>(v)]);
      prefix.pop_back();
    }
  };
  walk(m.InitialState(), 0.0);
  std::sort(all.begin(), all.end(), BetterHypothesis);
  return all;
}

NBestList Decode(const model::ModelConfig& cfg, const autograd::ParameterSet& params,
                 const autograd::Tensor& features, const BeamOptions& opts) {
  autograd::Tape tape;
  BoundModel m(tape, cfg, params, false);
  return BeamSearch(m, m.Encode(features), opts);
}

double WerBreakdown::rate() const {
  return static_cast<double>(errors()) / static_cast<double>(std::max<std::size_t>(ref_words, 1));
}

WerBreakdown& WerBreakdown::operator+=(const WerBreakdown& o) {
  substitutions += o.substitutions;
  insertions += o.insertions;
  deletions += o.deletions;
  ref_words += o.ref_words;
  return *this;
}

WerBreakdown WordEditDistance(std::span<const std::string> ref, std::span<const std::string> hyp) {
  const std::size_t n = ref.size(), m = hyp.size();
  std::vector<std::size_t> d((n + 1) * (m + 1));
  auto at = [&](std::size_t i, std::size_t j) -> std::size_t& { return d[i * (m + 1) + j]; };
  for (std::size_t i = 0; i <= n; ++i) at(i, 0) = i;
  for (std::size_t j = 0; j <= m; ++j) at(0, j) = j;
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      const std::size_t sub = at(i - 1, j - 1) + (ref[i - 1] == hyp[j - 1] ? 0 : 1);
      at(i, j) = std::min({sub, at(i - 1, j) + 1, at(i, j - 1) + 1});
    }
  }
  WerBreakdown w;
  w.ref_words = n;
  std::size_t i = n, j = m;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0) {
      const bool same = ref[i - 1] == hyp[j - 1];
      if (at(i, j) == at(i - 1, j - 1) + (same ? 0 : 1)) {
        if (!same) ++w.substitutions;
        --i;
        --j;
        continue;
      }
    }
    if (i > 0 && at(i, j) == at(i - 1, j) + 1) {
      ++w.deletions;
      --i;
    } else {
      ++w.insertions;
      --j;
    }
  }
  return w;
}

WerBreakdown WordEditDistance(const std::string& ref, const std::string& hyp) {
  const auto r = text::SplitWords(ref);
  const auto h = text::SplitWords(hyp);
  return WordEditDistance(std::span<const std::string>(r), std::span<const std::string>(h));
}

WerBreakdown CorpusWer(std::span<const std::string> refs, std::span<const std::string> hyps) {
  if (refs.size() != hyps.size()) {
    throw InputError("corpus WER: " + std::to_string(refs.size()) + " references vs " +
                     std::to_string(hyps.size()) + " hypotheses");
  }
  WerBreakdown total;
  for (std::size_t k = 0; k < refs.size(); ++k) total += WordEditDistance(refs[k], hyps[k]);
  return total;
}

}  // namespace las::decoding
