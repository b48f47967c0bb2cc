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

#include "las/ops.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "las/error.h"

namespace las::autograd {

namespace {

Tape& SameTape(Var a, Var b) {
  if (!a.valid() || a.tape() != b.tape()) {
    throw ContractError("operands live on different tapes");
  }
  return *a.tape();
}

Tape& TapeOf(Var a) {
  if (!a.valid()) throw ContractError("operation on an unbound Var");
  return *a.tape();
}

void RequireSameShape(const Tensor& a, const Tensor& b, const char* op) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shape " + ShapeString(a.shape()) + " vs " +
                         ShapeString(b.shape()));
  }
}

void RequireMatrix(const Tensor& a, const char* op) {
  if (a.rank() != 2) {
    throw DimensionError(std::string(op) + ": expected a matrix, got " + ShapeString(a.shape()));
  }
}

// Splits a shape around `axis` into (outer, n, inner) strides.
struct AxisView {
  std::size_t outer = 1, n = 1, inner = 1;
};

AxisView ViewAxis(const Shape& shape, int axis) {
  const int rank = static_cast<int>(shape.size());
  if (axis < 0) axis += rank;
  if (axis < 0 || axis >= rank) {
    throw DimensionError("axis " + std::to_string(axis) + " invalid for " + ShapeString(shape));
  }
  AxisView v;
  for (int d = 0; d < axis; ++d) v.outer *= shape[d];
  v.n = shape[axis];
  for (int d = axis + 1; d < rank; ++d) v.inner *= shape[d];
  return v;
}

// c += a * b for row-major [m x k] * [k x n].
void GemmAccumulate(const double* a, const double* b, double* c, std::size_t m,
                    std::size_t k, std::size_t n) {
  for (std::size_t i = 0; i < m; ++i) {
    double* crow = c + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = a[i * k + p];
      if (av == 0.0) continue;
      const double* brow = b + p * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

}  // namespace

Var MatMul(Var a, Var b) {
  Tape& tape = SameTape(a, b);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  RequireMatrix(av, "matmul");
  RequireMatrix(bv, "matmul");
  const std::size_t m = av.rows(), k = av.cols(), n = bv.cols();
  if (bv.rows() != k) {
    throw DimensionError("matmul: inner dims differ, " + ShapeString(av.shape()) + " x " +
                         ShapeString(bv.shape()));
  }
  Tensor out({m, n}, 0.0);
  GemmAccumulate(av.data().data(), bv.data().data(), out.data().data(), m, k, n);
  return tape.Record(std::move(out), {a, b}, [a, b, m, k, n](Tape& t, Var, const Tensor& g) {
    const double* gd = g.data().data();
    if (Tensor* ga = t.GradBuffer(a)) {
      // dA = G * B^T
      const double* bd = t.value(b).data().data();
      double* gad = ga->data().data();
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t p = 0; p < k; ++p) {
          double s = 0.0;
          for (std::size_t j = 0; j < n; ++j) s += gd[i * n + j] * bd[p * n + j];
          gad[i * k + p] += s;
        }
      }
    }
    if (Tensor* gb = t.GradBuffer(b)) {
      // dB = A^T * G
      const double* ad = t.value(a).data().data();
      double* gbd = gb->data().data();
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t p = 0; p < k; ++p) {
          const double av = ad[i * k + p];
          if (av == 0.0) continue;
          for (std::size_t j = 0; j < n; ++j) gbd[p * n + j] += av * gd[i * n + j];
        }
      }
    }
  });
}

Var Add(Var a, Var b) {
  Tape& tape = SameTape(a, b);
  RequireSameShape(a.value(), b.value(), "add");
  Tensor out = a.value();
  auto o = out.data();
  auto bd = b.value().data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] += bd[i];
  return tape.Record(std::move(out), {a, b}, [a, b](Tape& t, Var, const Tensor& g) {
    t.AccumulateGrad(a, g);
    t.AccumulateGrad(b, g);
  });
}

Var Sub(Var a, Var b) {
  Tape& tape = SameTape(a, b);
  RequireSameShape(a.value(), b.value(), "sub");
  Tensor out = a.value();
  auto o = out.data();
  auto bd = b.value().data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] -= bd[i];
  return tape.Record(std::move(out), {a, b}, [a, b](Tape& t, Var, const Tensor& g) {
    t.AccumulateGrad(a, g);
    if (Tensor* gb = t.GradBuffer(b)) {
      auto d = gb->data();
      for (std::size_t i = 0; i < d.size(); ++i) d[i] -= g[i];
    }
  });
}

Var Mul(Var a, Var b) {
  Tape& tape = SameTape(a, b);
  RequireSameShape(a.value(), b.value(), "mul");
  Tensor out = a.value();
  auto o = out.data();
  auto bd = b.value().data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] *= bd[i];
  return tape.Record(std::move(out), {a, b}, [a, b](Tape& t, Var, const Tensor& g) {
    if (Tensor* ga = t.GradBuffer(a)) {
      const Tensor& bv = t.value(b);
      auto d = ga->data();
      for (std::size_t i = 0; i < d.size(); ++i) d[i] += g[i] * bv[i];
    }
    if (Tensor* gb = t.GradBuffer(b)) {
      const Tensor& av = t.value(a);
      auto d = gb->data();
      for (std::size_t i = 0; i < d.size(); ++i) d[i] += g[i] * av[i];
    }
  });
}

Var Scale(Var a, double s) {
  Tape& tape = TapeOf(a);
  Tensor out = a.value();
  for (double& v : out.data()) v *= s;
  return tape.Record(std::move(out), {a}, [a, s](Tape& t, Var, const Tensor& g) {
    if (Tensor* ga = t.GradBuffer(a)) {
      auto d = ga->data();
      for (std::size_t i = 0; i < d.size(); ++i) d[i] += g[i] * s;
    }
  });
}

Var AddScalar(Var a, double s) {
  Tape& tape = TapeOf(a);
  Tensor out = a.value();
  for (double& v : out.data()) v += s;
  return tape.Record(std::move(out), {a},
                     [a](Tape& t, Var, const Tensor& g) { t.AccumulateGrad(a, g); });
}

Var Unary(UnaryOp op, Var a) {
  Tape& tape = TapeOf(a);
  Tensor out = a.value();
  auto o = out.data();
  switch (op) {
    case UnaryOp::kTanh:
      for (double& v : o) v = std::tanh(v);
      break;
    case UnaryOp::kSigmoid:
      for (double& v : o) {
        v = v >= 0 ? 1.0 / (1.0 + std::exp(-v)) : std::exp(v) / (1.0 + std::exp(v));
      }
      break;
    case UnaryOp::kExp:
      for (double& v : o) v = std::exp(v);
      break;
    case UnaryOp::kLog:
      for (double& v : o) {
        if (!(v > 0.0)) throw DomainError("log of non-positive value " + std::to_string(v));
        v = std::log(v);
      }
      break;
  }
  return tape.Record(std::move(out), {a}, [a, op](Tape& t, Var self, const Tensor& g) {
    Tensor* ga = t.GradBuffer(a);
    if (!ga) return;
    const Tensor& x = t.value(a);
    const Tensor& y = t.value(self);
    auto d = ga->data();
    switch (op) {
      case UnaryOp::kTanh:
        for (std::size_t i = 0; i < d.size(); ++i) d[i] += g[i] * (1.0 - y[i] * y[i]);
        break;
      case UnaryOp::kSigmoid:
        for (std::size_t i = 0; i < d.size(); ++i) d[i] += g[i] * y[i] * (1.0 - y[i]);
        break;
      case UnaryOp::kExp:
        for (std::size_t i = 0; i < d.size(); ++i) d[i] += g[i] * y[i];
        break;
      case UnaryOp::kLog:
        for (std::size_t i = 0; i < d.size(); ++i) d[i] += g[i] / x[i];
        break;
    }
  });
}

Var Softmax(Var x, int axis) {
  Tape& tape = TapeOf(x);
  const AxisView v = ViewAxis(x.shape(), axis);
  Tensor out = x.value();
  auto o = out.data();
  for (std::size_t a = 0; a < v.outer; ++a) {
    for (std::size_t c = 0; c < v.inner; ++c) {
      const std::size_t base = a * v.n * v.inner + c;
      double mx = o[base];
      for (std::size_t j = 1; j < v.n; ++j) mx = std::max(mx, o[base + j * v.inner]);
      double z = 0.0;
      for (std::size_t j = 0; j < v.n; ++j) {
        double& e = o[base + j * v.inner];
        e = std::exp(e - mx);
        z += e;
      }
      for (std::size_t j = 0; j < v.n; ++j) o[base + j * v.inner] /= z;
    }
  }
  return tape.Record(std::move(out), {x}, [x, v](Tape& t, Var self, const Tensor& g) {
    Tensor* gx = t.GradBuffer(x);
    if (!gx) return;
    const Tensor& y = t.value(self);
    auto d = gx->data();
    // dx_j = y_j * (g_j - sum_k g_k y_k)
    for (std::size_t a = 0; a < v.outer; ++a) {
      for (std::size_t c = 0; c < v.inner; ++c) {
        const std::size_t base = a * v.n * v.inner + c;
        double dot = 0.0;
        for (std::size_t j = 0; j < v.n; ++j) dot += g[base + j * v.inner] * y[base + j * v.inner];
        for (std::size_t j = 0; j < v.n; ++j) {
          const std::size_t i = base + j * v.inner;
          d[i] += y[i] * (g[i] - dot);
        }
      }
    }
  });
}

Var LogSoftmax(Var x, int axis) {
  Tape& tape = TapeOf(x);
  const AxisView v = ViewAxis(x.shape(), axis);
  Tensor out = x.value();
  auto o = out.data();
  for (std::size_t a = 0; a < v.outer; ++a) {
    for (std::size_t c = 0; c < v.inner; ++c) {
      const std::size_t base = a * v.n * v.inner + c;
      double mx = o[base];
      for (std::size_t j = 1; j < v.n; ++j) mx = std::max(mx, o[base + j * v.inner]);
      double z = 0.0;
      for (std::size_t j = 0; j < v.n; ++j) z += std::exp(o[base + j * v.inner] - mx);
      const double log_z = std::log(z);
      for (std::size_t j = 0; j < v.n; ++j) {
        double& e = o[base + j * v.inner];
        e = (e - mx) - log_z;
      }
    }
  }
  return tape.Record(std::move(out), {x}, [x, v](Tape& t, Var self, const Tensor& g) {
    Tensor* gx = t.GradBuffer(x);
    if (!gx) return;
    const Tensor& y = t.value(self);
    auto d = gx->data();
    // dx_j = g_j - softmax_j * sum_k g_k
    for (std::size_t a = 0; a < v.outer; ++a) {
      for (std::size_t c = 0; c < v.inner; ++c) {
        const std::size_t base = a * v.n * v.inner + c;
        double gsum = 0.0;
        for (std::size_t j = 0; j < v.n; ++j) gsum += g[base + j * v.inner];
        for (std::size_t j = 0; j < v.n; ++j) {
          const std::size_t i = base + j * v.inner;
          d[i] += g[i] - std::exp(y[i]) * gsum;
        }
      }
    }
  });
}

Var MaskedSoftmax(Var x, std::span<const std::uint8_t> valid) {
  Tape& tape = TapeOf(x);
  const Tensor& xv = x.value();
  RequireMatrix(xv, "masked_softmax");
  const std::size_t rows = xv.rows(), n = xv.cols();
  if (valid.size() != n) {
    throw DimensionError("masked_softmax: mask length " + std::to_string(valid.size()) +
                         " vs " + std::to_string(n) + " columns");
  }
  if (std::none_of(valid.begin(), valid.end(), [](std::uint8_t m) { return m != 0; })) {
    throw ContractError("masked_softmax: every position is masked");
  }
  std::vector<std::uint8_t> mask(valid.begin(), valid.end());
  Tensor out({rows, n}, 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    double mx = 0.0;
    bool first = true;
    for (std::size_t j = 0; j < n; ++j) {
      if (!mask[j]) continue;
      if (first || xv(r, j) > mx) mx = xv(r, j);
      first = false;
    }
    double z = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (!mask[j]) continue;
      out(r, j) = std::exp(xv(r, j) - mx);
      z += out(r, j);
    }
    for (std::size_t j = 0; j < n; ++j) out(r, j) /= z;
  }
  return tape.Record(std::move(out), {x},
                     [x, mask = std::move(mask), rows, n](Tape& t, Var self, const Tensor& g) {
                       Tensor* gx = t.GradBuffer(x);
                       if (!gx) return;
                       const Tensor& y = t.value(self);
                       for (std::size_t r = 0; r < rows; ++r) {
                         double dot = 0.0;
                         for (std::size_t j = 0; j < n; ++j) dot += g(r, j) * y(r, j);
                         for (std::size_t j = 0; j < n; ++j) {
                           if (mask[j]) (*gx)(r, j) += y(r, j) * (g(r, j) - dot);
                         }
                       }
                     });
}

Var Sum(Var x) {
  Tape& tape = TapeOf(x);
  double s = 0.0;
  for (double v : x.value().data()) s += v;
  return tape.Record(Tensor::Scalar(s), {x}, [x](Tape& t, Var, const Tensor& g) {
    if (Tensor* gx = t.GradBuffer(x)) {
      for (double& d : gx->data()) d += g[0];
    }
  });
}

Var Concat(const std::vector<Var>& parts, int axis) {
  if (parts.empty()) throw ContractError("concat of zero tensors");
  Tape& tape = TapeOf(parts[0]);
  if (axis < 0) axis += 2;
  if (axis != 0 && axis != 1) throw DimensionError("concat: axis must be 0 or 1");
  std::size_t rows = 0, cols = 0;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (parts[i].tape() != &tape) throw ContractError("operands live on different tapes");
    const Tensor& p = parts[i].value();
    RequireMatrix(p, "concat");
    if (axis == 0) {
      if (i && p.cols() != cols) throw DimensionError("concat: column counts differ");
      cols = p.cols();
      rows += p.rows();
    } else {
      if (i && p.rows() != rows) throw DimensionError("concat: row counts differ");
      rows = p.rows();
      cols += p.cols();
    }
  }
  Tensor out({rows, cols}, 0.0);
  std::size_t offset = 0;
  for (const Var& part : parts) {
    const Tensor& p = part.value();
    for (std::size_t r = 0; r < p.rows(); ++r) {
      for (std::size_t c = 0; c < p.cols(); ++c) {
        if (axis == 0) {
          out(offset + r, c) = p(r, c);
        } else {
          out(r, offset + c) = p(r, c);
        }
      }
    }
    offset += axis == 0 ? p.rows() : p.cols();
  }
  return tape.Record(std::move(out), parts, [parts, axis](Tape& t, Var, const Tensor& g) {
    std::size_t off = 0;
    for (const Var& part : parts) {
      const Shape& s = t.value(part).shape();
      if (Tensor* gp = t.GradBuffer(part)) {
        for (std::size_t r = 0; r < s[0]; ++r) {
          for (std::size_t c = 0; c < s[1]; ++c) {
            (*gp)(r, c) += axis == 0 ? g(off + r, c) : g(r, off + c);
          }
        }
      }
      off += axis == 0 ? s[0] : s[1];
    }
  });
}

Var SliceRows(Var x, std::size_t begin, std::size_t end) {
  Tape& tape = TapeOf(x);
  const Tensor& xv = x.value();
  RequireMatrix(xv, "slice_rows");
  if (begin >= end || end > xv.rows()) {
    throw DimensionError("slice_rows: [" + std::to_string(begin) + "," + std::to_string(end) +
                         ") out of " + ShapeString(xv.shape()));
  }
  const std::size_t n = xv.cols();
  auto src = xv.data().subspan(begin * n, (end - begin) * n);
  Tensor out({end - begin, n}, std::vector<double>(src.begin(), src.end()));
  return tape.Record(std::move(out), {x}, [x, begin, n](Tape& t, Var, const Tensor& g) {
    if (Tensor* gx = t.GradBuffer(x)) {
      auto d = gx->data().subspan(begin * n, g.size());
      for (std::size_t i = 0; i < d.size(); ++i) d[i] += g[i];
    }
  });
}

Var SliceCols(Var x, std::size_t begin, std::size_t end) {
  Tape& tape = TapeOf(x);
  const Tensor& xv = x.value();
  RequireMatrix(xv, "slice_cols");
  if (begin >= end || end > xv.cols()) {
    throw DimensionError("slice_cols: [" + std::to_string(begin) + "," + std::to_string(end) +
                         ") out of " + ShapeString(xv.shape()));
  }
  const std::size_t rows = xv.rows(), w = end - begin;
  Tensor out({rows, w}, 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < w; ++c) out(r, c) = xv(r, begin + c);
  }
  return tape.Record(std::move(out), {x}, [x, begin, rows, w](Tape& t, Var, const Tensor& g) {
    if (Tensor* gx = t.GradBuffer(x)) {
      for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < w; ++c) (*gx)(r, begin + c) += g(r, c);
      }
    }
  });
}

Var Transpose(Var x) {
  Tape& tape = TapeOf(x);
  const Tensor& xv = x.value();
  RequireMatrix(xv, "transpose");
  const std::size_t m = xv.rows(), n = xv.cols();
  Tensor out({n, m}, 0.0);
  for (std::size_t r = 0; r < m; ++r) {
    for (std::size_t c = 0; c < n; ++c) out(c, r) = xv(r, c);
  }
  return tape.Record(std::move(out), {x}, [x, m, n](Tape& t, Var, const Tensor& g) {
    if (Tensor* gx = t.GradBuffer(x)) {
      for (std::size_t r = 0; r < m; ++r) {
        for (std::size_t c = 0; c < n; ++c) (*gx)(r, c) += g(c, r);
      }
    }
  });
}

Var BroadcastRows(Var row, std::size_t m) {
  Tape& tape = TapeOf(row);
  const Tensor& rv = row.value();
  RequireMatrix(rv, "broadcast_rows");
  if (rv.rows() != 1) throw DimensionError("broadcast_rows: input must be [1 x n]");
  if (m == 0) throw DimensionError("broadcast_rows: zero rows");
  const std::size_t n = rv.cols();
  std::vector<double> data;
  data.reserve(m * n);
  for (std::size_t r = 0; r < m; ++r) data.insert(data.end(), rv.data().begin(), rv.data().end());
  return tape.Record(Tensor({m, n}, std::move(data)), {row},
                     [row, m, n](Tape& t, Var, const Tensor& g) {
                       if (Tensor* gr = t.GradBuffer(row)) {
                         for (std::size_t r = 0; r < m; ++r) {
                           for (std::size_t c = 0; c < n; ++c) (*gr)[c] += g[r * n + c];
                         }
                       }
                     });
}

Var Reshape(Var x, Shape shape) {
  Tape& tape = TapeOf(x);
  if (NumElements(shape) != x.value().size()) {
    throw DimensionError("reshape " + ShapeString(x.shape()) + " -> " + ShapeString(shape));
  }
  Tensor out(std::move(shape), x.value().vec());
  return tape.Record(std::move(out), {x}, [x](Tape& t, Var, const Tensor& g) {
    if (Tensor* gx = t.GradBuffer(x)) {
      auto d = gx->data();
      for (std::size_t i = 0; i < d.size(); ++i) d[i] += g[i];
    }
  });
}

Var Pick(Var x, std::size_t i) {
  Tape& tape = TapeOf(x);
  if (i >= x.value().size()) {
    throw DimensionError("pick: index " + std::to_string(i) + " out of " +
                         ShapeString(x.shape()));
  }
  return tape.Record(Tensor::Scalar(x.value()[i]), {x}, [x, i](Tape& t, Var, const Tensor& g) {
    if (Tensor* gx = t.GradBuffer(x)) (*gx)[i] += g[0];
  });
}

}  // namespace las::autograd
