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

// Acoustic frontend: 16 kHz PCM -> 80-dim log-Mel frames every 10 ms ->
// frames stacked with three frames of left context and kept every third
// frame, i.e. 320-dim vectors every 30 ms.

#ifndef LAS_FRONTEND_H_
#define LAS_FRONTEND_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "las/tensor.h"

namespace las::frontend {

inline constexpr int kSampleRate = 16000;
inline constexpr std::size_t kMelBins = 80;
inline constexpr std::size_t kStackedDim = 320;

struct Waveform {
  std::vector<double> samples;  // in [-1, 1]
  int sample_rate = kSampleRate;
};

struct FeatureSequence {
  autograd::Tensor frames;  // [T x D]
  double frame_shift_ms = 10.0;

  std::size_t num_frames() const { return frames.shape()[0]; }
  std::size_t dim() const { return frames.shape()[1]; }
};

struct LogMelOptions {
  std::size_t num_mels = kMelBins;
  double window_ms = 25.0;
  double hop_ms = 10.0;
  std::size_t fft_size = 512;
  double low_hz = 125.0;
  double high_hz = 7600.0;
  double log_floor = 1e-10;
};

double HzToMel(double hz);
double MelToHz(double mel);

// [num_mels x (fft_size/2 + 1)] triangular filters, equally spaced on the
// mel scale between low_hz and high_hz.
autograd::Tensor MelFilterbank(const LogMelOptions& opts, int sample_rate = kSampleRate);

// Per frame: periodic Hann window, |FFT|^2, mel filterbank, log(max(x, floor)).
// T = 1 + floor((N - window) / hop). Throws InputError on a sample rate
// other than 16 kHz or audio shorter than one window.
FeatureSequence LogMel(const Waveform& wave, const LogMelOptions& opts = {});

// Output frame j = [f(3j-3), f(3j-2), f(3j-1), f(3j)], negative indices
// zero-filled; ceil(T/3) frames of 4*D dims at three times the input shift.
FeatureSequence StackDownsample(const FeatureSequence& features);

// Full pipeline for audio input.
FeatureSequence ComputeFeatures(const Waveform& wave);

// RIFF/WAVE, PCM-16, mono.
Waveform ReadWav(const std::filesystem::path& path);
void WriteWav(const std::filesystem::path& path, const Waveform& wave);

// Binary matrix: int32 T, int32 D (little endian), then T*D float64 row-major.
void WriteFeatureMatrix(const std::filesystem::path& path, const autograd::Tensor& frames);
autograd::Tensor ReadFeatureMatrix(const std::filesystem::path& path);

}  // namespace las::frontend

#endif  // LAS_FRONTEND_H_
