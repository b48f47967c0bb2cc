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

// Central-difference gradient checking. The error reported is
//   max_i |analytic_i - numeric_i| / max(1, |analytic_i|).

#ifndef LAS_GRAD_CHECK_H_
#define LAS_GRAD_CHECK_H_

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "las/parameters.h"
#include "las/tape.h"

namespace las::autograd {

// Builds a scalar from the input leaf on a fresh tape.
using ScalarFn = std::function<Var(Tape&, Var)>;

double GradCheck(const ScalarFn& f, const Tensor& x, double eps = 1e-5);

// Builds a scalar loss from a bound parameter set.
using ParameterLossFn = std::function<Var(Tape&, std::span<const Var>)>;

struct ParameterCheckResult {
  double max_rel_error = 0.0;
  std::string worst_parameter;
  std::size_t coordinates = 0;
};

// Perturbs every coordinate of every parameter in turn. `params` is restored
// before returning.
ParameterCheckResult GradCheckParameters(const ParameterLossFn& f, ParameterSet& params,
                                         double eps = 1e-5);

}  // namespace las::autograd

#endif  // LAS_GRAD_CHECK_H_
