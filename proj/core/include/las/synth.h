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

// Synthetic spoken-digit task. Each word owns a fixed Gaussian template of
// log-Mel-like frames; an utterance is the concatenation of its words'
// templates plus per-utterance noise. Everything is a pure function of
// (words, seed).

#ifndef LAS_SYNTH_H_
#define LAS_SYNTH_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "las/frontend.h"

namespace las::frontend {

// "zero" .. "nine" and "oh".
const std::vector<std::string>& DigitWords();

struct SynthOptions {
  std::size_t frames_per_word = 15;  // 10 ms frames
  double noise_stddev = 0.5;
  std::uint64_t template_seed = 0x5eed;
};

struct SynthUtterance {
  FeatureSequence features;  // [T x 80] at 10 ms
  std::string transcript;
};

// Throws InputError for an empty sequence or a word outside DigitWords().
SynthUtterance SynthesizeUtterance(std::span<const std::string> words, std::uint64_t seed,
                                   const SynthOptions& opts = {});

struct SynthSpec {
  std::vector<std::string> words;
  std::uint64_t seed = 0;
};

// Random digit strings of min_words..max_words words, reproducible from seed.
std::vector<SynthSpec> MakeDigitSpecs(std::size_t count, std::uint64_t seed,
                                      std::size_t min_words = 1, std::size_t max_words = 5);

}  // namespace las::frontend

#endif  // LAS_SYNTH_H_
