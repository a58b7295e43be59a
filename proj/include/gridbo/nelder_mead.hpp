// Copyright 2026 The gridbo Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// =============================================================================
//
// Derivative-free simplex minimization with dimension-adaptive coefficients.
// +inf objective values act as a barrier.

#ifndef GRIDBO_NELDER_MEAD_HPP_
#define GRIDBO_NELDER_MEAD_HPP_

#include <functional>

#include "gridbo/lti.hpp"

namespace gridbo {

struct NelderMeadOptions {
  /// Hard cap on calls to f (at least one call is always made).
  int max_evaluations = 1000;
  /// Edge length of the initial simplex along each axis.
  double initial_step = 0.1;
  /// Converged when the spread of simplex values is below
  /// ftol * (1 + |best|) and its diameter is below xtol * (1 + |x_best|).
  double ftol = 1e-9;
  double xtol = 1e-9;
  /// Rebuild the simplex around the best point after convergence, while the
  /// budget lasts and each rebuild still improves.
  bool restart_on_convergence = true;
  /// Early exit as soon as the best value satisfies this predicate.
  std::function<bool(double)> stop;
};

struct NelderMeadResult {
  Vector x;
  double value = 0.0;
  int evaluations = 0;
  bool converged = false;
};

NelderMeadResult nelder_mead(const std::function<double(const Vector&)>& f, const Vector& x0,
                             const NelderMeadOptions& opts);

}  // namespace gridbo

#endif  // GRIDBO_NELDER_MEAD_HPP_
