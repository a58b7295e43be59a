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
// Grid point allocation: starting from a small selection and a controller
// that stabilizes it, repeatedly find the point the current controller
// handles worst, add it, and redesign.

#ifndef GRIDBO_ALLOCATION_HPP_
#define GRIDBO_ALLOCATION_HPP_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "gridbo/bayes_opt.hpp"
#include "gridbo/errors.hpp"
#include "gridbo/lfr.hpp"
#include "gridbo/rbf.hpp"
#include "gridbo/synthesis.hpp"

namespace gridbo {

/// A robust controller, or per-point snapshots with their RBF field.
class ControllerDesign {
 public:
  ControllerDesign() = default;
  static ControllerDesign robust(ControllerParam k);
  static ControllerDesign lpv(std::vector<ControllerParam> snapshots, RbfControllerField field);

  PlantKind kind() const noexcept { return kind_; }
  const ControllerStructure& structure() const;
  /// Controller in force at `point`: the robust one, or the field query.
  ControllerParam at(const GridPoint& point) const;

  const ControllerParam& robust_controller() const;
  const std::vector<ControllerParam>& snapshots() const noexcept { return snapshots_; }
  const RbfControllerField& field() const;

 private:
  PlantKind kind_ = PlantKind::kRobust;
  std::optional<ControllerParam> robust_;
  std::vector<ControllerParam> snapshots_;
  std::optional<RbfControllerField> field_;
};

/// J(P_theta, K) per spec; +inf for an unstable or ill-posed loop. Throws
/// DomainError when the point lies outside the plant's domain.
double evaluate_cost(const LfrPlant& plant, const GridPoint& point, const ControllerParam& k, const CostSpec& spec);
double evaluate_cost(const LfrPlant& plant, const GridPoint& point, const ControllerDesign& design,
                     const CostSpec& spec);

struct SelectionEntry {
  int iteration = 0;
  /// Cost at allocation time under the controller in force then.
  double cost = 0.0;
};

/// Ordered, pairwise-distinct grid points of one domain.
class Selection {
 public:
  static constexpr double kMinSeparation = 1e-9;

  Selection() = default;
  explicit Selection(DeltaStructure domain) : domain_(std::move(domain)) {}

  /// Throws DomainError when the point is outside the domain or within
  /// kMinSeparation (infinity norm) of a selected point.
  void add(GridPoint point, int iteration, double cost);
  bool near(const GridPoint& point, double tol = kMinSeparation) const;

  std::size_t size() const noexcept { return points_.size(); }
  const std::vector<GridPoint>& points() const noexcept { return points_; }
  const std::vector<SelectionEntry>& history() const noexcept { return history_; }
  const DeltaStructure& domain() const noexcept { return domain_; }

 private:
  DeltaStructure domain_;
  std::vector<GridPoint> points_;
  std::vector<SelectionEntry> history_;
};

enum class InitMode { kCorners, kRandom, kDiagonal, kExplicit };
InitMode parse_init_mode(const std::string& text);
std::string to_string(InitMode mode);

/// Initial points: the lower and upper box corners, n0 uniform samples,
/// the {lower, centre, upper} diagonal, or the explicit list.
std::vector<GridPoint> initial_points(const DeltaStructure& domain, InitMode mode, std::size_t n0, std::uint64_t seed,
                                      const std::vector<GridPoint>& explicit_points = {});

/// Local models at every selected point (concurrent).
std::vector<StateSpaceModel> local_models(const LfrPlant& plant, const std::vector<GridPoint>& points,
                                          Execution exec = Execution::kParallel);

struct DesignOptions {
  ControllerStructure structure;
  SynthesisOptions synthesis;
  /// Per-snapshot refinement for LPV plants.
  SynthesisOptions snapshot;
};

/// Robust plants: one controller over all points. LPV plants: gridded
/// snapshots plus their RBF field. `warm` seeds restart 0.
ControllerDesign design_controller(const LfrPlant& plant, const CostSpec& spec, const std::vector<GridPoint>& points,
                                   const DesignOptions& opts, const std::optional<ControllerDesign>& warm = std::nullopt);

struct InitResult {
  Selection selection;
  ControllerDesign design;
};

/// Selects initial points and designs a controller on them.
InitResult initialize(const LfrPlant& plant, const CostSpec& spec, const std::vector<GridPoint>& points,
                      const DesignOptions& opts);
/// n0 uniform points drawn with `seed`.
InitResult random_init(const LfrPlant& plant, std::size_t n0, const CostSpec& spec, const DesignOptions& opts,
                       std::uint64_t seed);

struct AllocationTraceRow {
  int iteration = 0;
  GridPoint theta;
  /// Cost at theta under the controller before and after the redesign.
  double j_before = 0.0;
  double j_after = 0.0;
  std::size_t selection_size = 0;
  /// Largest cost over the previous selection under the previous controller.
  double j_previous_max = 0.0;
  /// Posterior-mean prediction at theta (+inf on an unstable hit).
  double predicted = 0.0;
  int bo_evaluations = 0;
};

struct AllocationOptions {
  std::size_t n_target = 5;
  AcquisitionConfig bo;
  DesignOptions design;
  /// Stop when the predicted maximum improves on the current worst cost by
  /// less than this ratio for `early_stop_patience` iterations in a row, or
  /// when the re-queried maximizer still duplicates a selected point.
  /// Patience 0 runs to n_target; a duplicate then falls back to the worst
  /// observation lying off the grid.
  double early_stop_ratio = 0.01;
  int early_stop_patience = 2;
  std::uint64_t seed = 0;
  Execution execution = Execution::kParallel;
};

struct AllocationResult {
  Selection selection;
  ControllerDesign design;
  std::vector<AllocationTraceRow> trace;
  std::vector<std::vector<BoTraceRow>> bo_traces;
  bool stopped_early = false;
};

/// Synthesis failed mid-loop; carries everything allocated so far.
class AllocationError : public Error {
 public:
  AllocationError(const std::string& what, AllocationResult partial)
      : Error(what), partial_(std::move(partial)) {}
  const AllocationResult& partial() const noexcept { return partial_; }

 private:
  AllocationResult partial_;
};

AllocationResult allocate(const LfrPlant& plant, const CostSpec& spec, const Selection& theta0,
                          const ControllerDesign& k0, const AllocationOptions& opts);

/// Average of the per-matrix Lyapunov solutions (Q = I), returned when it
/// certifies every matrix (X > 0, A'X + XA < -1e-9 I). Failure is
/// inconclusive. Throws StabilityError for a non-Hurwitz input.
std::optional<Matrix> common_lyapunov_heuristic(const std::vector<Matrix>& a_list);

struct SweepResult {
  GridPoint theta_worst;
  double j_worst = 0.0;
  std::vector<GridPoint> points;
  std::vector<double> costs;
  std::size_t unstable_count = 0;
};

/// Sweep points: a regular density^d grid for d <= 4, else density^2 Latin
/// hypercube samples (seed fixed).
std::vector<GridPoint> sweep_points(const Box& box, int density);

/// Evaluates the cost at every sweep point. Ties for the worst point go to
/// the lowest index.
SweepResult worst_case_sweep(const LfrPlant& plant, const ControllerDesign& design, const CostSpec& spec,
                             int density, Execution exec = Execution::kParallel);

/// Throws ShapeError when a row's point does not have `dim` components.
void write_trace_csv(std::ostream& os, const std::vector<AllocationTraceRow>& trace, Eigen::Index dim);
void write_sweep_csv(std::ostream& os, const SweepResult& sweep);

void to_json(nlohmann::json& j, const ControllerDesign& design);
void from_json(const nlohmann::json& j, ControllerDesign& design);
void to_json(nlohmann::json& j, const Selection& selection);
void from_json(const nlohmann::json& j, Selection& selection);

}  // namespace gridbo

#endif  // GRIDBO_ALLOCATION_HPP_
