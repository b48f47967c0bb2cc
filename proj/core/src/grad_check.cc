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

#include "las/grad_check.h"

#include <algorithm>
#include <cmath>

#include "las/error.h"

namespace las::autograd {

namespace {

double RelError(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max(1.0, std::abs(analytic));
}

double Evaluate(const ScalarFn& f, const Tensor& x) {
  Tape tape;
  Var in = tape.Leaf(x, false);
  return f(tape, in).value().item();
}

double Evaluate(const ParameterLossFn& f, const ParameterSet& params) {
  Tape tape;
  const auto bound = BindParameters(tape, params, false);
  return f(tape, bound).value().item();
}

}  // namespace

double GradCheck(const ScalarFn& f, const Tensor& x, double eps) {
  if (!(eps > 0.0)) throw ContractError("grad_check needs eps > 0");
  Tensor analytic;
  {
    Tape tape;
    Var in = tape.Leaf(x, true);
    Var out = f(tape, in);
    tape.Backward(out);
    analytic = tape.grad(in);
  }
  double worst = 0.0;
  Tensor probe = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + eps;
    const double up = Evaluate(f, probe);
    probe[i] = x[i] - eps;
    const double down = Evaluate(f, probe);
    probe[i] = x[i];
    worst = std::max(worst, RelError(analytic[i], (up - down) / (2.0 * eps)));
  }
  return worst;
}

ParameterCheckResult GradCheckParameters(const ParameterLossFn& f, ParameterSet& params,
                                         double eps) {
  if (!(eps > 0.0)) throw ContractError("grad_check needs eps > 0");
  Gradients analytic;
  {
    Tape tape;
    const auto bound = BindParameters(tape, params, true);
    Var loss = f(tape, bound);
    tape.Backward(loss);
    analytic = CollectGradients(tape, bound);
  }
  ParameterCheckResult result;
  for (std::size_t p = 0; p < params.size(); ++p) {
    Tensor& value = params.value(p);
    for (std::size_t i = 0; i < value.size(); ++i) {
      const double saved = value[i];
      value[i] = saved + eps;
      const double up = Evaluate(f, params);
      value[i] = saved - eps;
      const double down = Evaluate(f, params);
      value[i] = saved;
      const double err = RelError(analytic[p][i], (up - down) / (2.0 * eps));
      if (err > result.max_rel_error) {
        result.max_rel_error = err;
        result.worst_parameter = params.name(p);
      }
      ++result.coordinates;
    }
  }
  return result;
}

}  // namespace las::autograd
