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

#include "las/parameters.h"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>

#include "las/error.h"

namespace las::autograd {

namespace {

constexpr const char* kCheckpointFormat = "las-checkpoint-v1";

std::filesystem::path WithSuffix(const std::filesystem::path& stem, const char* suffix) {
  return std::filesystem::path(stem.string() + suffix);
}

void PutLittleEndian(double v, char* out) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int b = 0; b < 8; ++b) out[b] = static_cast<char>((bits >> (8 * b)) & 0xff);
}

double GetLittleEndian(const char* in) {
  std::uint64_t bits = 0;
  for (int b = 0; b < 8; ++b) {
    bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[b])) << (8 * b);
  }
  return std::bit_cast<double>(bits);
}

}  // namespace

std::size_t ParameterSet::Add(std::string name, Tensor value) {
  if (Find(name)) throw ContractError("duplicate parameter name: " + name);
  entries_.push_back({std::move(name), std::move(value)});
  return entries_.size() - 1;
}

std::optional<std::size_t> ParameterSet::Find(const std::string& name) const {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].name == name) return i;
  }
  return std::nullopt;
}

std::size_t ParameterSet::NumScalars() const {
  std::size_t n = 0;
  for (const auto& e : entries_) n += e.value.size();
  return n;
}

std::vector<Var> BindParameters(Tape& tape, const ParameterSet& params, bool trainable) {
  std::vector<Var> bound;
  bound.reserve(params.size());
  for (const auto& e : params.entries()) bound.push_back(tape.Leaf(e.value, trainable));
  return bound;
}

Gradients CollectGradients(const Tape& tape, std::span<const Var> bound) {
  Gradients g;
  g.reserve(bound.size());
  for (const Var& v : bound) g.push_back(tape.grad(v));
  return g;
}

Gradients ZeroGradients(const ParameterSet& params) {
  Gradients g;
  g.reserve(params.size());
  for (const auto& e : params.entries()) g.emplace_back(e.value.shape(), 0.0);
  return g;
}

void AddInto(Gradients& a, const Gradients& b) {
  if (a.size() != b.size()) throw DimensionError("gradient sets differ in length");
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].shape() != b[i].shape()) throw DimensionError("gradient shapes differ");
    auto d = a[i].data();
    auto s = b[i].data();
    for (std::size_t j = 0; j < d.size(); ++j) d[j] += s[j];
  }
}

void ScaleInPlace(Gradients& g, double s) {
  for (Tensor& t : g) {
    for (double& v : t.data()) v *= s;
  }
}

double GlobalNorm(const Gradients& g) {
  double ss = 0.0;
  for (const Tensor& t : g) {
    for (double v : t.data()) ss += v * v;
  }
  return std::sqrt(ss);
}

void SaveCheckpoint(const std::filesystem::path& stem, const ParameterSet& params,
                    const nlohmann::json& metadata) {
  if (stem.has_parent_path()) std::filesystem::create_directories(stem.parent_path());
  nlohmann::json manifest;
  manifest["format"] = kCheckpointFormat;
  manifest["tensors"] = nlohmann::json::array();
  std::string blob;
  blob.reserve(params.NumScalars() * 8);
  char buf[8];
  for (const auto& e : params.entries()) {
    manifest["tensors"].push_back(
        {{"name", e.name}, {"shape", e.value.shape()}, {"offset", blob.size()}});
    for (double v : e.value.data()) {
      PutLittleEndian(v, buf);
      blob.append(buf, 8);
    }
  }
  manifest["bytes"] = blob.size();
  manifest["metadata"] = metadata;

  std::ofstream bin(WithSuffix(stem, ".bin"), std::ios::binary | std::ios::trunc);
  bin.write(blob.data(), static_cast<std::streamsize>(blob.size()));
  std::ofstream js(WithSuffix(stem, ".json"), std::ios::trunc);
  js << manifest.dump(2) << "\n";
  if (!bin || !js) throw InputError("failed writing checkpoint " + stem.string());
}

LoadedCheckpoint LoadCheckpoint(const std::filesystem::path& stem) {
  std::ifstream js(WithSuffix(stem, ".json"));
  if (!js) throw InputError("missing checkpoint manifest " + WithSuffix(stem, ".json").string());
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(js);
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("bad checkpoint manifest: ") + e.what());
  }
  if (manifest.value("format", "") != kCheckpointFormat) {
    throw InputError("unknown checkpoint format in " + stem.string());
  }
  std::ifstream bin(WithSuffix(stem, ".bin"), std::ios::binary);
  if (!bin) throw InputError("missing checkpoint data " + WithSuffix(stem, ".bin").string());
  const std::string blob((std::istreambuf_iterator<char>(bin)), std::istreambuf_iterator<char>());
  if (blob.size() != manifest.at("bytes").get<std::size_t>()) {
    throw InputError("checkpoint data size does not match manifest");
  }

  LoadedCheckpoint out;
  for (const auto& t : manifest.at("tensors")) {
    const Shape shape = t.at("shape").get<Shape>();
    const std::size_t offset = t.at("offset").get<std::size_t>();
    const std::size_t n = NumElements(shape);
    if (offset + n * 8 > blob.size()) throw InputError("checkpoint tensor out of range");
    std::vector<double> data(n);
    for (std::size_t i = 0; i < n; ++i) data[i] = GetLittleEndian(blob.data() + offset + 8 * i);
    out.params.Add(t.at("name").get<std::string>(), Tensor(shape, std::move(data)));
  }
  out.metadata = manifest.value("metadata", nlohmann::json::object());
  return out;
}

}  // namespace las::autograd
