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
// Time-domain simulation of a nonlinear plant in feedback with a fixed or
// scheduled controller, integrated by an adaptive Dormand-Prince 5(4) pair.

#ifndef GRIDBO_SIM_HPP_
#define GRIDBO_SIM_HPP_

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <limits>
#include <optional>
#include <variant>
#include <vector>

#include "gridbo/benchmarks.hpp"
#include "gridbo/parallel.hpp"
#include "gridbo/rbf.hpp"
#include "gridbo/synthesis.hpp"

namespace gridbo {

struct OdeOptions {
  double rel_tol = 1e-6;
  double abs_tol = 1e-8;
  double max_step = std::numeric_limits<double>::infinity();
  /// First trial step; 0 picks one from the size of x and x'.
  double initial_step = 0.0;
  /// Record the solution every output_dt (landing on those times exactly);
  /// 0 records every accepted step.
  double output_dt = 0.0;
  /// ||x|| beyond this counts as divergence.
  double divergence_norm = 1e8;
  /// Accepted plus rejected steps before the run counts as diverged.
  long max_steps = 50'000'000;

  /// Throws ConfigError unless the tolerances and limits are positive.
  void validate() const;
};

struct OdeSolution {
  std::vector<double> t;
  std::vector<Vector> x;
  long steps = 0;
  long rejected = 0;
  /// Blow-up, a non-finite state, step-size underflow or an exhausted step
  /// budget. The solution is truncated at the last good point.
  bool diverged = false;
};

using OdeRhs = std::function<Vector(double, const Vector&)>;

/// Integrates x' = f(t, x) from t0 to t1 with error control per component
/// |err_i| <= abs_tol + rel_tol * |x_i| in the RMS sense.
OdeSolution ode_rk45(const OdeRhs& f, const Vector& x0, double t0, double t1, const OdeOptions& opts = {});

/// Controller scheduled by the plant state: K(eta(x)) from an RBF field.
struct ScheduledController {
  RbfControllerField field;
  std::function<Vector(const Vector&)> scheduling_map;
};

using SimController = std::variant<ControllerParam, ScheduledController>;

/// White noise held over sample_time with variance psd / sample_time,
/// passed through `filter` and added to the plant input.
struct InputDisturbance {
  double psd = 0.0;
  double sample_time = 0.01;
  std::uint64_t seed = 0;
  /// Square filter with as many channels as the plant input; identity if unset.
  std::optional<StateSpaceModel> filter;
};

struct SimScenario {
  NonlinearModel model;
  SimController controller;
  Reference reference;
  /// Square actuator dynamics between controller output and plant input;
  /// direct connection if unset.
  std::optional<StateSpaceModel> actuator;
  InputDisturbance disturbance;
  double t_end = 0.0;
  OdeOptions ode;
};

struct SimResult {
  std::vector<double> t;
  std::vector<Vector> x;  // plant states
  std::vector<Vector> u;  // plant input (actuator output plus disturbance)
  std::vector<Vector> y;
  std::vector<Vector> r;
  long steps = 0;
  long rejected = 0;
  bool diverged = false;
  /// Root mean square of r - y per output channel over the recorded samples;
  /// +inf on divergence.
  Vector rmse;
};

/// Zero initial state for plant, controller, actuator and filter; the
/// controller sees e = r - y. Throws ShapeError on a dimension mismatch.
SimResult simulate_closed_loop(const SimScenario& scenario);

/// Independent scenarios, concurrently.
std::vector<SimResult> simulate_batch(const std::vector<SimScenario>& scenarios,
                                      Execution exec = Execution::kParallel);

/// Columns t, x_*, u_*, y_*, r_*.
void write_sim_csv(std::ostream& os, const SimResult& result);

}  // namespace gridbo

#endif  // GRIDBO_SIM_HPP_
