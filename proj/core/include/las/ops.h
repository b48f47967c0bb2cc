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

// Differentiable operations. Every op records one node on the tape of its
// operands; mixing Vars from different tapes is a ContractError.
//
// There is no implicit broadcasting. Binary elementwise ops need equal
// shapes; the only tensor/scalar mixing is through Scale and AddScalar, and
// row-wise broadcasting is spelled out with BroadcastRows.

#ifndef LAS_OPS_H_
#define LAS_OPS_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "las/tape.h"

namespace las::autograd {

// [m x k] * [k x n] -> [m x n].
Var MatMul(Var a, Var b);

Var Add(Var a, Var b);
Var Sub(Var a, Var b);
Var Mul(Var a, Var b);
Var Scale(Var a, double s);
Var AddScalar(Var a, double s);

enum class UnaryOp { kTanh, kSigmoid, kExp, kLog };
Var Unary(UnaryOp op, Var a);
inline Var Tanh(Var a) { return Unary(UnaryOp::kTanh, a); }
inline Var Sigmoid(Var a) { return Unary(UnaryOp::kSigmoid, a); }
inline Var Exp(Var a) { return Unary(UnaryOp::kExp, a); }
// Throws DomainError on any entry <= 0.
inline Var Log(Var a) { return Unary(UnaryOp::kLog, a); }

// Normalizes along `axis` (negative values count from the back).
Var Softmax(Var x, int axis = -1);
Var LogSoftmax(Var x, int axis = -1);

// Softmax over each row of a matrix where only positions with valid[j] != 0
// take part. Masked outputs are exactly 0 and pass no gradient. A row with
// no valid position is a ContractError.
Var MaskedSoftmax(Var x, std::span<const std::uint8_t> valid);

// Sum of all entries, shape {1}.
Var Sum(Var x);

// Rank-2 structural ops.
Var Concat(const std::vector<Var>& parts, int axis);
Var SliceRows(Var x, std::size_t begin, std::size_t end);
Var SliceCols(Var x, std::size_t begin, std::size_t end);
Var Transpose(Var x);
// [1 x n] -> [m x n], every row a copy of the input.
Var BroadcastRows(Var row, std::size_t m);

Var Reshape(Var x, Shape shape);

// Entry at flat index i, shape {1}.
Var Pick(Var x, std::size_t i);

inline Var operator+(Var a, Var b) { return Add(a, b); }
inline Var operator-(Var a, Var b) { return Sub(a, b); }
inline Var operator*(Var a, Var b) { return Mul(a, b); }

}  // namespace las::autograd

#endif  // LAS_OPS_H_
