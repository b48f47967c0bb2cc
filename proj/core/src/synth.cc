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

#include "las/synth.h"

#include <algorithm>
#include <random>

#include "las/error.h"

namespace las::frontend {

using autograd::Tensor;

namespace {

std::uint64_t Mix(std::uint64_t a, std::uint64_t b) {
  // splitmix64 finalizer over the combined words.
  std::uint64_t z = a * 0x9e3779b97f4a7c15ULL + b + 0x632be59bd9b4e019ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

const std::vector<std::string>& DigitWords() {
  static const std::vector<std::string> words = {"zero", "one", "two",   "three", "four", "five",
                                                 "six",  "seven", "eight", "nine", "oh"};
  return words;
}

SynthUtterance SynthesizeUtterance(std::span<const std::string> words, std::uint64_t seed,
                                   const SynthOptions& opts) {
  if (words.empty()) throw InputError("synthetic utterance needs at least one word");
  const auto& vocab = DigitWords();
  std::vector<std::size_t> ids;
  for (const auto& w : words) {
    auto it = std::find(vocab.begin(), vocab.end(), w);
    if (it == vocab.end()) throw InputError("unknown synthetic word: " + w);
    ids.push_back(static_cast<std::size_t>(it - vocab.begin()));
  }

  const std::size_t f = opts.frames_per_word;
  Tensor frames({ids.size() * f, kMelBins}, 0.0);
  std::mt19937_64 noise_rng(Mix(seed, 0xabcdef));
  std::normal_distribution<double> noise(0.0, opts.noise_stddev);
  std::string transcript;
  for (std::size_t w = 0; w < ids.size(); ++w) {
    std::mt19937_64 template_rng(Mix(opts.template_seed, ids[w]));
    std::normal_distribution<double> unit(0.0, 1.0);
    for (std::size_t t = 0; t < f; ++t) {
      for (std::size_t d = 0; d < kMelBins; ++d) {
        frames(w * f + t, d) = unit(template_rng) + noise(noise_rng);
      }
    }
    if (w) transcript += ' ';
    transcript += words[w];
  }
  return {{std::move(frames), 10.0}, std::move(transcript)};
}

std::vector<SynthSpec> MakeDigitSpecs(std::size_t count, std::uint64_t seed,
                                      std::size_t min_words, std::size_t max_words) {
  if (min_words == 0 || max_words < min_words) {
    throw ConfigError("bad word-count range for synthetic specs");
  }
  std::mt19937_64 rng(Mix(seed, 0x1234));
  std::uniform_int_distribution<std::size_t> len(min_words, max_words);
  std::uniform_int_distribution<std::size_t> word(0, DigitWords().size() - 1);
  std::vector<SynthSpec> specs(count);
  for (auto& s : specs) {
    const std::size_t n = len(rng);
    for (std::size_t i = 0; i < n; ++i) s.words.push_back(DigitWords()[word(rng)]);
    s.seed = rng();
  }
  return specs;
}

}  // namespace las::frontend
