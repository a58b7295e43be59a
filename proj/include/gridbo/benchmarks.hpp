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
// Built-in benchmark plants: the unbalanced disk (two real uncertainties) and
// a two-link planar robot arm (ten scheduling variables), each with its
// nonlinear model, LFR, generalized plant and reference waveforms.

#ifndef GRIDBO_BENCHMARKS_HPP_
#define GRIDBO_BENCHMARKS_HPP_

#include <functional>
#include <string>
#include <vector>

#include "gridbo/lfr.hpp"
#include "gridbo/lti.hpp"

namespace gridbo {

/// x' = f(t, x, u), y = h(x).
struct NonlinearModel {
  std::string name;
  Eigen::Index nx = 0;
  Eigen::Index nu = 0;
  Eigen::Index ny = 0;
  std::function<Vector(double, const Vector&, const Vector&)> f;
  std::function<Vector(const Vector&)> h;
};

/// Smooth piecewise reference. Consecutive waypoints are joined by a quintic
/// smoothstep, so position, rate and acceleration are continuous.
class Reference {
 public:
  Reference() = default;
  Reference(std::string name, std::vector<double> times, Matrix values);

  const std::string& name() const noexcept { return name_; }
  Eigen::Index channels() const noexcept { return values_.cols(); }
  double end_time() const { return times_.empty() ? 0.0 : times_.back(); }
  Vector value(double t) const;
  Vector rate(double t) const;

 private:
  std::string name_;
  std::vector<double> times_;
  Matrix values_;  // one row per waypoint
};

/// Looks up a built-in reference by name; throws ConfigError if unknown.
Reference builtin_reference(const std::string& name);
std::vector<std::string> builtin_reference_names();

// -- Unbalanced disk ---------------------------------------------------------

struct DiskParameters {
  double mass = 7e-2;
  double g = 9.8;
  double l = 4.2e-2;
  double inertia = 2.2e-4;
  double tau = 5.971e-1;
  double km = 1.531e1;
  double w_mass = 0.042;
  double p_nominal = 0.39;
  double w_p = 0.61;

  double c1() const { return g * l / inertia; }
  double c2() const { return 1.0 / tau; }
  double c3() const { return km / tau; }
};

/// LFR of the disk. Inputs (delta[3], u), outputs (delta[2], y).
LfrPlant unbalanced_disk_lfr(const DiskParameters& p = {});

/// Weighting filters, each realized as a first-order SISO system.
struct DiskWeights {
  StateSpaceModel wz1, wz2, wr, wdi;
};
DiskWeights unbalanced_disk_weights();

/// Generalized plant. Inputs (delta[3], w_r, w_di, u), outputs
/// (delta[2], z1, z2, y) where y is the tracking error fed to the controller.
LfrPlant unbalanced_disk_genplant(const DiskParameters& p = {});

/// x = (angle, rate), u = voltage. The mass is a model parameter.
NonlinearModel unbalanced_disk_model(double mass, const DiskParameters& p = {});

// -- Robot arm ---------------------------------------------------------------

struct ArmParameters {
  double a = 5.6794;
  double b = 1.473;
  double c = 1.7985;
  double d = 0.4;
  double e = 0.4;
  double f = 2.0;
  double n = 1.0;
};

inline constexpr int kArmScheduling = 10;

/// p = eta(x) for x = (q1, q2, q1', q2').
Vector arm_scheduling_map(const Vector& x, const ArmParameters& p = {});

/// Affine LPV matrices A(p), B(p).
Matrix arm_a(const Vector& sched, const ArmParameters& p = {});
Matrix arm_b(const Vector& sched, const ArmParameters& p = {});

/// Box spanned by eta along a reference trajectory (positions and rates),
/// widened by `widen` times each side's range plus a small absolute floor.
Box arm_scheduling_box(const Reference& ref, int samples = 2001, double widen = 0.05, const ArmParameters& p = {});

struct RobotArmModels {
  NonlinearModel model;
  LfrPlant genplant;
  std::function<Vector(const Vector&)> scheduling_map;
  /// diag(W3, W3): the actuator lag the generalized plant puts before the
  /// torque input.
  StateSpaceModel actuator;
};

/// Nonlinear arm, LPV generalized plant over `box`, and the scheduling map.
/// Generalized plant states: arm (4), tracking weight (2), actuator weight (2).
/// Inputs (delta[12], r[2], d[2], u[2]); outputs (delta[12], z1[2], z2[2], y[2]).
RobotArmModels robot_arm_models(const Box& box, const ArmParameters& p = {});

/// Same, over the box derived from the built-in training reference.
RobotArmModels robot_arm_models();

}  // namespace gridbo

#endif  // GRIDBO_BENCHMARKS_HPP_
