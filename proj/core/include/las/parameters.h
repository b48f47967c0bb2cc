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

#ifndef LAS_PARAMETERS_H_
#define LAS_PARAMETERS_H_

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "las/tape.h"
#include "las/tensor.h"

namespace las::autograd {

struct NamedTensor {
  std::string name;
  Tensor value;
};

// Ordered collection of named trainable tensors. Order is insertion order
// and defines the layout of gradients and checkpoints.
class ParameterSet {
 public:
  // Returns the index of the new entry. Duplicate names are a ContractError.
  std::size_t Add(std::string name, Tensor value);

  std::size_t size() const { return entries_.size(); }
  const std::string& name(std::size_t i) const { return entries_[i].name; }
  Tensor& value(std::size_t i) { return entries_[i].value; }
  const Tensor& value(std::size_t i) const { return entries_[i].value; }
  std::optional<std::size_t> Find(const std::string& name) const;
  const std::vector<NamedTensor>& entries() const { return entries_; }

  std::size_t NumScalars() const;

  friend bool operator==(const ParameterSet& a, const ParameterSet& b) {
    if (a.entries_.size() != b.entries_.size()) return false;
    for (std::size_t i = 0; i < a.entries_.size(); ++i) {
      if (a.entries_[i].name != b.entries_[i].name ||
          !(a.entries_[i].value == b.entries_[i].value)) {
        return false;
      }
    }
    return true;
  }

 private:
  std::vector<NamedTensor> entries_;
};

// One gradient tensor per parameter, same order as the ParameterSet.
using Gradients = std::vector<Tensor>;

// Registers every parameter as a leaf on `tape`.
std::vector<Var> BindParameters(Tape& tape, const ParameterSet& params, bool trainable = true);
Gradients CollectGradients(const Tape& tape, std::span<const Var> bound);
Gradients ZeroGradients(const ParameterSet& params);
// In-place a += b.
void AddInto(Gradients& a, const Gradients& b);
void ScaleInPlace(Gradients& g, double s);
double GlobalNorm(const Gradients& g);

// Checkpoint = `<stem>.bin` (little-endian float64, tensors back to back in
// set order) plus `<stem>.json` (name, shape and byte offset per tensor, and
// a free-form "metadata" object). Round trips are bit-exact.
void SaveCheckpoint(const std::filesystem::path& stem, const ParameterSet& params,
                    const nlohmann::json& metadata = nlohmann::json::object());

struct LoadedCheckpoint {
  ParameterSet params;
  nlohmann::json metadata;
};
LoadedCheckpoint LoadCheckpoint(const std::filesystem::path& stem);

}  // namespace las::autograd

#endif  // LAS_PARAMETERS_H_
