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

#include <cmath>
#include <filesystem>
#include <numbers>
#include <fstream>
#include <random>

#include <gtest/gtest.h>

#include "las/error.h"
#include "las/frontend.h"
#include "las/synth.h"

namespace las::frontend {
namespace {

using autograd::Tensor;

Waveform Tone(double hz, std::size_t n, double amplitude = 0.5) {
  Waveform w;
  w.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    w.samples[i] = amplitude * std::sin(2.0 * std::numbers::pi * hz * static_cast<double>(i) / 16000.0);
  }
  return w;
}

FeatureSequence Ramp(std::size_t frames, std::size_t dim) {
  Tensor t({frames, dim});
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = static_cast<double>(i + 1);
  return {t, 10.0};
}

TEST(LogMelTest, OneSecondGivesNinetyEightFrames) {
  // T = 1 + floor((N - 400) / 160)
  const std::size_t expected = 1 + (16000 - 400) / 160;
  ASSERT_EQ(expected, 98u);
  const FeatureSequence f = LogMel(Tone(440.0, 16000));
  EXPECT_EQ(f.num_frames(), expected);
  EXPECT_EQ(f.dim(), 80u);
  EXPECT_EQ(f.frame_shift_ms, 10.0);
}

TEST(LogMelTest, FrameCountFormulaOnOddLengths) {
  for (std::size_t n : {400u, 401u, 559u, 560u, 561u, 4321u}) {
    EXPECT_EQ(LogMel(Tone(300.0, n)).num_frames(), 1 + (n - 400) / 160) << n;
  }
}

TEST(LogMelTest, SilenceHitsTheLogFloor) {
  Waveform w;
  w.samples.assign(4000, 0.0);
  const FeatureSequence f = LogMel(w);
  for (double v : f.frames.data()) EXPECT_EQ(v, std::log(1e-10));
}

TEST(LogMelTest, ToneArgmaxIsStableAndNearItsFrequency) {
  const FeatureSequence f = LogMel(Tone(1000.0, 16000));
  // Independent mel-scale oracle for the filter center frequencies.
  auto mel = [](double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); };
  auto hz = [](double m) { return 700.0 * (std::pow(10.0, m / 2595.0) - 1.0); };
  const double lo = mel(125.0), hi = mel(7600.0);
  std::size_t nearest = 0;
  for (std::size_t m = 1; m < 80; ++m) {
    const double c = hz(lo + (hi - lo) * (m + 1) / 81.0);
    const double best = hz(lo + (hi - lo) * (nearest + 1) / 81.0);
    if (std::abs(c - 1000.0) < std::abs(best - 1000.0)) nearest = m;
  }
  std::size_t first_argmax = 0;
  for (std::size_t t = 0; t < f.num_frames(); ++t) {
    std::size_t arg = 0;
    for (std::size_t m = 1; m < 80; ++m) {
      if (f.frames(t, m) > f.frames(t, arg)) arg = m;
    }
    if (t == 0) first_argmax = arg;
    EXPECT_EQ(arg, first_argmax) << "frame " << t;
  }
  EXPECT_LE(std::max(first_argmax, nearest) - std::min(first_argmax, nearest), 1u);
}

TEST(LogMelTest, RejectsWrongRateAndShortAudio) {
  Waveform w = Tone(100.0, 16000);
  w.sample_rate = 8000;
  EXPECT_THROW(LogMel(w), InputError);
  EXPECT_THROW(LogMel(Tone(100.0, 399)), InputError);
}

TEST(LogMelTest, Deterministic) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Waveform w;
  for (int i = 0; i < 8000; ++i) w.samples.push_back(u(rng));
  EXPECT_EQ(LogMel(w).frames, LogMel(w).frames);
}

TEST(MelFilterbankTest, TrianglesPeakAtOneAndStayInRange) {
  const Tensor fb = MelFilterbank({});
  ASSERT_EQ(fb.rows(), 80u);
  ASSERT_EQ(fb.cols(), 257u);
  for (std::size_t m = 0; m < 80; ++m) {
    double peak = 0.0;
    for (std::size_t k = 0; k < 257; ++k) {
      EXPECT_GE(fb(m, k), 0.0);
      EXPECT_LE(fb(m, k), 1.0);
      peak = std::max(peak, fb(m, k));
      const double f = k * 16000.0 / 512.0;
      if (f < 125.0 || f > 7600.0) EXPECT_EQ(fb(m, k), 0.0);
    }
    EXPECT_GT(peak, 0.0) << "filter " << m << " is empty";
  }
}

TEST(StackDownsampleTest, NineFramesGiveThree) {
  const FeatureSequence out = StackDownsample(Ramp(9, 80));
  EXPECT_EQ(out.num_frames(), 3u);
  EXPECT_EQ(out.dim(), 320u);
  EXPECT_EQ(out.frame_shift_ms, 30.0);
}

TEST(StackDownsampleTest, SingleFrameIsLeftPadded) {
  const FeatureSequence in = Ramp(1, 80);
  const FeatureSequence out = StackDownsample(in);
  ASSERT_EQ(out.num_frames(), 1u);
  for (std::size_t c = 0; c < 240; ++c) EXPECT_EQ(out.frames(0, c), 0.0);
  for (std::size_t c = 0; c < 80; ++c) EXPECT_EQ(out.frames(0, 240 + c), in.frames(0, c));
}

TEST(StackDownsampleTest, SecondOutputHoldsFramesZeroToThree) {
  const FeatureSequence in = Ramp(7, 80);
  const FeatureSequence out = StackDownsample(in);
  for (std::size_t slot = 0; slot < 4; ++slot) {
    for (std::size_t c = 0; c < 80; ++c) {
      EXPECT_EQ(out.frames(1, slot * 80 + c), in.frames(slot, c));
    }
  }
}

// Property: ceil(T/3) outputs, every entry a zero pad or a verbatim copy of
// the input frame its index formula names.
TEST(StackDownsampleTest, EntriesArePadsOrCopies) {
  for (std::size_t t = 1; t <= 20; ++t) {
    const FeatureSequence in = Ramp(t, 5);
    const FeatureSequence out = StackDownsample(in);
    ASSERT_EQ(out.num_frames(), (t + 2) / 3);
    for (std::size_t j = 0; j < out.num_frames(); ++j) {
      for (std::size_t slot = 0; slot < 4; ++slot) {
        const long src = static_cast<long>(3 * j + slot) - 3;
        for (std::size_t c = 0; c < 5; ++c) {
          const double v = out.frames(j, slot * 5 + c);
          if (src < 0) {
            EXPECT_EQ(v, 0.0);
          } else {
            EXPECT_EQ(v, in.frames(static_cast<std::size_t>(src), c));
          }
        }
      }
    }
  }
}

TEST(WavTest, RoundTripAndPipeline) {
  const auto path = std::filesystem::temp_directory_path() / "las_frontend_test.wav";
  const Waveform w = Tone(700.0, 16000);
  WriteWav(path, w);
  const Waveform r = ReadWav(path);
  ASSERT_EQ(r.samples.size(), w.samples.size());
  EXPECT_EQ(r.sample_rate, 16000);
  for (std::size_t i = 0; i < w.samples.size(); ++i) EXPECT_NEAR(r.samples[i], w.samples[i], 1.0 / 32768);
  const FeatureSequence f = ComputeFeatures(r);
  EXPECT_EQ(f.num_frames(), 33u);  // ceil(98 / 3)
  EXPECT_EQ(f.dim(), kStackedDim);
  std::filesystem::remove(path);
}

TEST(WavTest, RejectsGarbage) {
  const auto path = std::filesystem::temp_directory_path() / "las_garbage.wav";
  {
    std::ofstream out(path);
    out << "not a wave file at all";
  }
  EXPECT_THROW(ReadWav(path), InputError);
  std::filesystem::remove(path);
  EXPECT_THROW(ReadWav("/nonexistent.wav"), InputError);
}

TEST(FeatureMatrixTest, RoundTripIsBitExact) {
  const auto path = std::filesystem::temp_directory_path() / "las_feats.bin";
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n(0.0, 3.0);
  Tensor t({7, 320});
  for (double& v : t.data()) v = n(rng);
  WriteFeatureMatrix(path, t);
  EXPECT_EQ(std::filesystem::file_size(path), 8u + 7u * 320u * 8u);
  EXPECT_EQ(ReadFeatureMatrix(path), t);
  std::filesystem::remove(path);
}

TEST(SynthTest, ReproducibleAndTranscribed) {
  const std::vector<std::string> words = {"one", "two", "oh"};
  const SynthUtterance a = SynthesizeUtterance(words, 17);
  const SynthUtterance b = SynthesizeUtterance(words, 17);
  const SynthUtterance c = SynthesizeUtterance(words, 18);
  EXPECT_EQ(a.features.frames, b.features.frames);
  EXPECT_FALSE(a.features.frames == c.features.frames);
  EXPECT_EQ(a.transcript, "one two oh");
  EXPECT_EQ(a.features.num_frames(), 45u);
  EXPECT_EQ(a.features.dim(), 80u);
}

TEST(SynthTest, UnknownWordIsInputError) {
  const std::vector<std::string> words = {"one", "eleven"};
  EXPECT_THROW(SynthesizeUtterance(words, 1), InputError);
  EXPECT_THROW(SynthesizeUtterance(std::vector<std::string>{}, 1), InputError);
}

TEST(SynthTest, SpecsAreReproducible) {
  const auto a = MakeDigitSpecs(50, 3, 1, 4);
  const auto b = MakeDigitSpecs(50, 3, 1, 4);
  ASSERT_EQ(a.size(), 50u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].words, b[i].words);
    EXPECT_EQ(a[i].seed, b[i].seed);
    EXPECT_GE(a[i].words.size(), 1u);
    EXPECT_LE(a[i].words.size(), 4u);
  }
}

}  // namespace
}  // namespace las::frontend
