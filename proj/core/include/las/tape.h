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

// Define-by-run reverse-mode differentiation.
//
// A Tape is an append-only list of nodes. Every operation appends one node
// holding its forward value, the ids of its parents (always smaller than its
// own id) and a closure that maps the node's output gradient onto its
// parents. Backward() walks node ids in strictly decreasing order, so the
// accumulation order, and therefore every gradient bit, is fixed.
//
// A Tape is single-threaded. Independent tapes share nothing and may run on
// different threads.

#ifndef LAS_TAPE_H_
#define LAS_TAPE_H_

#include <cstdint>
#include <functional>
#include <initializer_list>
#include <vector>

#include "las/tensor.h"

namespace las::autograd {

class Tape;

using NodeId = std::int32_t;

// Handle to a tensor recorded on a tape.
class Var {
 public:
  Var() = default;
  Var(Tape* tape, NodeId id) : tape_(tape), id_(id) {}

  Tape* tape() const { return tape_; }
  NodeId id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }

  const Tensor& value() const;
  const Shape& shape() const { return value().shape(); }

 private:
  Tape* tape_ = nullptr;
  NodeId id_ = -1;
};

class Tape {
 public:
  // Receives the node itself and the gradient flowing into it, and
  // distributes that gradient to the node's parents.
  using BackwardFn = std::function<void(Tape& tape, Var self, const Tensor& out_grad)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Leaf node. Gradients are only tracked when requires_grad is set.
  Var Leaf(Tensor value, bool requires_grad = true);
  Var Constant(Tensor value) { return Leaf(std::move(value), false); }

  // Appends an op node. The backward closure is dropped when no parent
  // requires a gradient. Throws DomainError on non-finite values.
  Var Record(Tensor value, std::initializer_list<Var> parents, BackwardFn backward);
  Var Record(Tensor value, const std::vector<Var>& parents, BackwardFn backward);

  const Tensor& value(Var v) const;
  bool requires_grad(Var v) const;

  // Gradient of the last Backward() loss with respect to v. A node the loss
  // does not depend on has an all-zero gradient.
  Tensor grad(Var v) const;

  // Adds g into the gradient buffer of v (no-op when v needs no gradient).
  void AccumulateGrad(Var v, const Tensor& g);
  // Direct access to the gradient buffer, allocated on first use. Returns
  // nullptr when v needs no gradient.
  Tensor* GradBuffer(Var v);

  // Seeds d loss / d loss = 1 and runs every closure in decreasing node
  // order. The loss must hold exactly one element. A second call without
  // Reset() is a ContractError.
  void Backward(Var loss);

  // Drops every node; outstanding Vars become dangling.
  void Reset();

  std::size_t size() const { return nodes_.size(); }
  bool backward_done() const { return backward_done_; }

 private:
  struct Node {
    Tensor value;
    std::vector<NodeId> parents;
    BackwardFn backward;
    Tensor grad;
    bool has_grad = false;
    bool requires_grad = false;
  };

  void CheckOwned(Var v) const;

  std::vector<Node> nodes_;
  bool backward_done_ = false;
};

}  // namespace las::autograd

#endif  // LAS_TAPE_H_
