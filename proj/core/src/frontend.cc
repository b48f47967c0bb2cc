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

#include "las/frontend.h"

#include <fftw3.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <fstream>
#include <iterator>
#include <memory>
#include <mutex>
#include <numbers>
#include <string>

#include "las/error.h"

namespace las::frontend {

using autograd::Tensor;

namespace {

// fftw planning is not thread-safe; execution with the new-array interface is.
std::mutex& PlannerMutex() {
  static std::mutex mu;
  return mu;
}

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};

class RealFft {
 public:
  explicit RealFft(std::size_t n) : n_(n) {
    in_.reset(fftw_alloc_real(n));
    out_.reset(fftw_alloc_complex(n / 2 + 1));
    std::lock_guard<std::mutex> lock(PlannerMutex());
    plan_ = fftw_plan_dft_r2c_1d(static_cast<int>(n), in_.get(), out_.get(), FFTW_ESTIMATE);
  }
  ~RealFft() {
    std::lock_guard<std::mutex> lock(PlannerMutex());
    fftw_destroy_plan(plan_);
  }
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  double* input() { return in_.get(); }

  // Power spectrum of input(), n/2 + 1 bins.
  void PowerSpectrum(std::vector<double>& power) {
    fftw_execute(plan_);
    power.resize(n_ / 2 + 1);
    for (std::size_t k = 0; k < power.size(); ++k) {
      const double re = out_.get()[k][0];
      const double im = out_.get()[k][1];
      power[k] = re * re + im * im;
    }
  }

 private:
  std::size_t n_;
  std::unique_ptr<double, FftwFree> in_;
  std::unique_ptr<fftw_complex, FftwFree> out_;
  fftw_plan plan_;
};

std::uint32_t ReadU32(const std::string& b, std::size_t off) {
  return static_cast<std::uint32_t>(static_cast<unsigned char>(b[off])) |
         static_cast<std::uint32_t>(static_cast<unsigned char>(b[off + 1])) << 8 |
         static_cast<std::uint32_t>(static_cast<unsigned char>(b[off + 2])) << 16 |
         static_cast<std::uint32_t>(static_cast<unsigned char>(b[off + 3])) << 24;
}

std::uint16_t ReadU16(const std::string& b, std::size_t off) {
  return static_cast<std::uint16_t>(static_cast<unsigned char>(b[off]) |
                                    static_cast<unsigned char>(b[off + 1]) << 8);
}

void PutU32(std::string& b, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) b.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void PutU16(std::string& b, std::uint16_t v) {
  b.push_back(static_cast<char>(v & 0xff));
  b.push_back(static_cast<char>(v >> 8));
}

std::string ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

}  // namespace

double HzToMel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double MelToHz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

Tensor MelFilterbank(const LogMelOptions& opts, int sample_rate) {
  const std::size_t bins = opts.fft_size / 2 + 1;
  const double lo = HzToMel(opts.low_hz);
  const double hi = HzToMel(opts.high_hz);
  std::vector<double> edges(opts.num_mels + 2);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    edges[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(opts.num_mels + 1);
  }
  Tensor fb({opts.num_mels, bins}, 0.0);
  for (std::size_t k = 0; k < bins; ++k) {
    const double hz = static_cast<double>(k) * sample_rate / static_cast<double>(opts.fft_size);
    const double mel = HzToMel(hz);
    for (std::size_t m = 0; m < opts.num_mels; ++m) {
      const double left = edges[m], center = edges[m + 1], right = edges[m + 2];
      if (mel <= left || mel >= right) continue;
      fb(m, k) = mel <= center ? (mel - left) / (center - left) : (right - mel) / (right - center);
    }
  }
  return fb;
}

FeatureSequence LogMel(const Waveform& wave, const LogMelOptions& opts) {
  if (wave.sample_rate != kSampleRate) {
    throw InputError("expected 16000 Hz audio, got " + std::to_string(wave.sample_rate));
  }
  const auto window =
      static_cast<std::size_t>(std::lround(opts.window_ms * wave.sample_rate / 1000.0));
  const auto hop = static_cast<std::size_t>(std::lround(opts.hop_ms * wave.sample_rate / 1000.0));
  if (window > opts.fft_size) throw ConfigError("fft size smaller than the analysis window");
  if (wave.samples.size() < window) {
    throw InputError("audio shorter than one analysis window (" +
                     std::to_string(wave.samples.size()) + " samples)");
  }
  const std::size_t frames = 1 + (wave.samples.size() - window) / hop;

  std::vector<double> hann(window);
  for (std::size_t n = 0; n < window; ++n) {
    hann[n] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(n) /
                                   static_cast<double>(window));
  }
  const Tensor fb = MelFilterbank(opts, wave.sample_rate);
  const std::size_t bins = fb.cols();

  RealFft fft(opts.fft_size);
  std::vector<double> power;
  Tensor out({frames, opts.num_mels}, 0.0);
  for (std::size_t t = 0; t < frames; ++t) {
    double* in = fft.input();
    std::fill(in, in + opts.fft_size, 0.0);
    for (std::size_t n = 0; n < window; ++n) in[n] = wave.samples[t * hop + n] * hann[n];
    fft.PowerSpectrum(power);
    for (std::size_t m = 0; m < opts.num_mels; ++m) {
      double e = 0.0;
      for (std::size_t k = 0; k < bins; ++k) e += fb(m, k) * power[k];
      out(t, m) = std::log(std::max(e, opts.log_floor));
    }
  }
  return {std::move(out), opts.hop_ms};
}

FeatureSequence StackDownsample(const FeatureSequence& features) {
  constexpr std::size_t kContext = 3;
  constexpr std::size_t kStride = 3;
  const std::size_t t_in = features.num_frames();
  const std::size_t d = features.dim();
  const std::size_t t_out = (t_in + kStride - 1) / kStride;
  Tensor out({t_out, (kContext + 1) * d}, 0.0);
  for (std::size_t j = 0; j < t_out; ++j) {
    const std::size_t center = j * kStride;
    for (std::size_t slot = 0; slot <= kContext; ++slot) {
      // Slot 0 holds frame center-3, slot 3 the center frame itself.
      if (center + slot < kContext) continue;
      const std::size_t src = center + slot - kContext;
      for (std::size_t c = 0; c < d; ++c) out(j, slot * d + c) = features.frames(src, c);
    }
  }
  return {std::move(out), features.frame_shift_ms * kStride};
}

FeatureSequence ComputeFeatures(const Waveform& wave) { return StackDownsample(LogMel(wave)); }

Waveform ReadWav(const std::filesystem::path& path) {
  const std::string b = ReadFile(path);
  if (b.size() < 12 || b.compare(0, 4, "RIFF") != 0 || b.compare(8, 4, "WAVE") != 0) {
    throw InputError(path.string() + " is not a RIFF/WAVE file");
  }
  Waveform wave;
  bool have_fmt = false;
  std::size_t off = 12;
  while (off + 8 <= b.size()) {
    const std::string id = b.substr(off, 4);
    const std::size_t size = ReadU32(b, off + 4);
    const std::size_t body = off + 8;
    if (body + size > b.size()) throw InputError(path.string() + ": truncated chunk " + id);
    if (id == "fmt ") {
      if (size < 16) throw InputError(path.string() + ": short fmt chunk");
      const auto format = ReadU16(b, body);
      const auto channels = ReadU16(b, body + 2);
      wave.sample_rate = static_cast<int>(ReadU32(b, body + 4));
      const auto bits = ReadU16(b, body + 14);
      if (format != 1 || channels != 1 || bits != 16) {
        throw InputError(path.string() + ": only PCM-16 mono is supported");
      }
      have_fmt = true;
    } else if (id == "data") {
      if (!have_fmt) throw InputError(path.string() + ": data chunk before fmt chunk");
      wave.samples.resize(size / 2);
      for (std::size_t i = 0; i < wave.samples.size(); ++i) {
        const auto s = static_cast<std::int16_t>(ReadU16(b, body + 2 * i));
        wave.samples[i] = static_cast<double>(s) / 32768.0;
      }
      return wave;
    }
    off = body + size + (size & 1);
  }
  throw InputError(path.string() + ": no data chunk");
}

void WriteWav(const std::filesystem::path& path, const Waveform& wave) {
  std::string pcm;
  pcm.reserve(wave.samples.size() * 2);
  for (double s : wave.samples) {
    const double clamped = std::clamp(s, -1.0, 32767.0 / 32768.0);
    PutU16(pcm, static_cast<std::uint16_t>(static_cast<std::int16_t>(std::lround(clamped * 32768.0))));
  }
  std::string b = "RIFF";
  PutU32(b, static_cast<std::uint32_t>(36 + pcm.size()));
  b += "WAVEfmt ";
  PutU32(b, 16);
  PutU16(b, 1);
  PutU16(b, 1);
  PutU32(b, static_cast<std::uint32_t>(wave.sample_rate));
  PutU32(b, static_cast<std::uint32_t>(wave.sample_rate * 2));
  PutU16(b, 2);
  PutU16(b, 16);
  b += "data";
  PutU32(b, static_cast<std::uint32_t>(pcm.size()));
  b += pcm;
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(b.data(), static_cast<std::streamsize>(b.size()));
  if (!out) throw InputError("cannot write " + path.string());
}

void WriteFeatureMatrix(const std::filesystem::path& path, const Tensor& frames) {
  std::string b;
  PutU32(b, static_cast<std::uint32_t>(frames.rows()));
  PutU32(b, static_cast<std::uint32_t>(frames.cols()));
  for (double v : frames.data()) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    PutU32(b, static_cast<std::uint32_t>(bits & 0xffffffffu));
    PutU32(b, static_cast<std::uint32_t>(bits >> 32));
  }
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(b.data(), static_cast<std::streamsize>(b.size()));
  if (!out) throw InputError("cannot write " + path.string());
}

Tensor ReadFeatureMatrix(const std::filesystem::path& path) {
  const std::string b = ReadFile(path);
  if (b.size() < 8) throw InputError(path.string() + ": truncated feature header");
  const auto rows = static_cast<std::int32_t>(ReadU32(b, 0));
  const auto cols = static_cast<std::int32_t>(ReadU32(b, 4));
  if (rows <= 0 || cols <= 0) throw InputError(path.string() + ": bad feature dims");
  const std::size_t n = static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols);
  if (b.size() != 8 + 8 * n) throw InputError(path.string() + ": feature size mismatch");
  std::vector<double> data(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint64_t lo = ReadU32(b, 8 + 8 * i);
    const std::uint64_t hi = ReadU32(b, 12 + 8 * i);
    data[i] = std::bit_cast<double>(lo | (hi << 32));
  }
  return Tensor({static_cast<std::size_t>(rows), static_cast<std::size_t>(cols)}, std::move(data));
}

}  // namespace las::frontend
