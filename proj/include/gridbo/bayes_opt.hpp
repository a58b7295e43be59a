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
// Expected-improvement Bayesian optimization of a closed-loop cost over a
// box, used to locate the grid point a controller handles worst.

#ifndef GRIDBO_BAYES_OPT_HPP_
#define GRIDBO_BAYES_OPT_HPP_

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "gridbo/gp.hpp"
#include "gridbo/parallel.hpp"

namespace gridbo {

struct AcquisitionConfig {
  /// Exploration margin subtracted from the improvement.
  double epsilon = 0.3;
  /// Total observation count at which the query loop stops.
  int n_max = 20;
  /// Random observations drawn when the incoming data has fewer than two
  /// finite values.
  int n_initial = 5;
  int multistart_count = 32;
  int local_steps = 30;
  std::uint64_t seed = 0;
  GpFitOptions gp;

  /// Throws ConfigError unless every count and epsilon are positive.
  void validate() const;
};

/// Named presets: "disk", "satellite", "robot_arm".
AcquisitionConfig acquisition_profile(const std::string& name);
std::vector<std::string> acquisition_profile_names();

/// (mu - g - eps) Phi(Z) + sigma phi(Z), Z = (mu - g - eps) / sigma, clamped
/// at 0; exactly 0 when sigma = 0.
double expected_improvement(double mu, double sigma, double gamma_plus, double epsilon);

/// Maximizes f over the unit cube of dimension `dim` from `starts` uniform
/// seeds, each refined by `steps` rounds of compass search. Ties go to the
/// lowest seed index. Returns the unit-cube point.
Vector maximize_in_unit_box(const std::function<double(const Vector&)>& f, Eigen::Index dim, int starts, int steps,
                            std::uint64_t seed, Execution exec = Execution::kParallel);

/// Point of the domain with the largest EI under `model`, with the incumbent
/// taken as model.best_observed().
GridPoint maximize_acquisition(const GpModel& model, const Box& domain, const AcquisitionConfig& cfg);

struct BoTraceRow {
  int iteration = 0;
  GridPoint theta;
  double ei = 0.0;
  double gamma = 0.0;
  double gamma_plus = 0.0;
};

struct BoResult {
  GridPoint theta_star;
  /// Posterior mean at theta_star, or +inf when an unstable point was hit.
  double predicted = 0.0;
  bool unstable = false;
  ObservationSet data;
  std::vector<BoTraceRow> trace;
  int cost_evaluations = 0;
};

using PointCost = std::function<double(const GridPoint&)>;

/// Fits a GP, queries the EI maximizer, evaluates the true cost and repeats
/// until the data holds cfg.n_max observations. Returns the posterior-mean
/// maximizer of the final fit, or the first point with infinite cost as
/// soon as one is seen. Cost exceptions derived from gridbo::Error count as
/// infinite cost.
BoResult bo_find_most_informative(const PointCost& cost, const Box& domain, ObservationSet data,
                                  const AcquisitionConfig& cfg);

void write_bo_trace_csv(std::ostream& os, const std::vector<BoTraceRow>& trace);

}  // namespace gridbo

#endif  // GRIDBO_BAYES_OPT_HPP_
