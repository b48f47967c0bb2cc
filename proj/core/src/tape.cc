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

#include "las/tape.h"

#include <string>

#include "las/error.h"

namespace las::autograd {

const Tensor& Var::value() const {
  if (!tape_) throw ContractError("value() on an unbound Var");
  return tape_->value(*this);
}

Var Tape::Leaf(Tensor value, bool requires_grad) {
  Node node;
  node.value = std::move(value);
  node.requires_grad = requires_grad;
  nodes_.push_back(std::move(node));
  return Var(this, static_cast<NodeId>(nodes_.size() - 1));
}

Var Tape::Record(Tensor value, std::initializer_list<Var> parents, BackwardFn backward) {
  return Record(std::move(value), std::vector<Var>(parents), std::move(backward));
}

Var Tape::Record(Tensor value, const std::vector<Var>& parents, BackwardFn backward) {
  if (!value.AllFinite()) {
    throw DomainError("non-finite value produced by op of shape " + ShapeString(value.shape()));
  }
  Node node;
  node.value = std::move(value);
  node.parents.reserve(parents.size());
  for (const Var& p : parents) {
    CheckOwned(p);
    node.parents.push_back(p.id());
    node.requires_grad = node.requires_grad || nodes_[p.id()].requires_grad;
  }
  if (node.requires_grad) node.backward = std::move(backward);
  nodes_.push_back(std::move(node));
  return Var(this, static_cast<NodeId>(nodes_.size() - 1));
}

void Tape::CheckOwned(Var v) const {
  if (v.tape() != this || v.id() < 0 || static_cast<std::size_t>(v.id()) >= nodes_.size()) {
    throw ContractError("Var does not belong to this tape");
  }
}

const Tensor& Tape::value(Var v) const {
  CheckOwned(v);
  return nodes_[v.id()].value;
}

bool Tape::requires_grad(Var v) const {
  CheckOwned(v);
  return nodes_[v.id()].requires_grad;
}

Tensor Tape::grad(Var v) const {
  CheckOwned(v);
  const Node& n = nodes_[v.id()];
  if (n.has_grad) return n.grad;
  return Tensor(n.value.shape(), 0.0);
}

Tensor* Tape::GradBuffer(Var v) {
  CheckOwned(v);
  Node& n = nodes_[v.id()];
  if (!n.requires_grad) return nullptr;
  if (!n.has_grad) {
    n.grad = Tensor(n.value.shape(), 0.0);
    n.has_grad = true;
  }
  return &n.grad;
}

void Tape::AccumulateGrad(Var v, const Tensor& g) {
  Tensor* buf = GradBuffer(v);
  if (!buf) return;
  if (buf->size() != g.size()) {
    throw DimensionError("gradient shape " + ShapeString(g.shape()) + " vs node " +
                         ShapeString(buf->shape()));
  }
  auto dst = buf->data();
  auto src = g.data();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

void Tape::Backward(Var loss) {
  CheckOwned(loss);
  if (backward_done_) throw ContractError("Backward() called twice without Reset()");
  if (nodes_[loss.id()].value.size() != 1) {
    throw ContractError("Backward() needs a scalar loss, got " +
                        ShapeString(nodes_[loss.id()].value.shape()));
  }
  backward_done_ = true;
  if (!nodes_[loss.id()].requires_grad) return;
  Tensor* seed = GradBuffer(loss);
  (*seed)[0] = 1.0;
  for (NodeId k = loss.id(); k >= 0; --k) {
    Node& n = nodes_[k];
    if (!n.has_grad || !n.backward) continue;
    // Closures only touch the buffers of lower-numbered parents, and no node
    // is appended during the sweep, so the reference stays valid.
    n.backward(*this, Var(this, k), n.grad);
  }
}

void Tape::Reset() {
  nodes_.clear();
  backward_done_ = false;
}

}  // namespace las::autograd
