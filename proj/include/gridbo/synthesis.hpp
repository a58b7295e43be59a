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
// Fixed-structure multi-model controller synthesis.
//
// A controller (Ak, Bk, Ck, Dk) of fixed order is tuned to minimize the worst
// (or summed) closed-loop cost over a finite set of local plant models. The
// tuner is derivative-free: a stability phase drives the largest closed-loop
// spectral abscissa below -margin, then a performance phase minimizes the
// aggregate cost with an infinite barrier on instability. Both phases use
// Nelder-Mead from several random starts.

#ifndef GRIDBO_SYNTHESIS_HPP_
#define GRIDBO_SYNTHESIS_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "gridbo/lti.hpp"
#include "gridbo/parallel.hpp"

namespace gridbo {

enum class NormKind { kHinf, kH2, kGenH2 };
enum class Combine { kMax, kSum };

std::string to_string(NormKind kind);
NormKind parse_norm_kind(const std::string& text);

/// weight * ||T_{inputs -> outputs}||.
struct CostTerm {
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  NormKind norm = NormKind::kHinf;
  double weight = 1.0;
};

struct CostSpec {
  std::vector<CostTerm> terms;
  Combine combine = Combine::kMax;
  double hinf_tol = 1e-5;

  /// Throws ConfigError when empty, a weight is negative, or a group is
  /// missing from `sys`.
  void validate(const StateSpaceModel& sys) const;
};

/// Cost of a closed loop; +inf when it is not Hurwitz or its norm cannot be
/// computed reliably.
double closed_loop_cost(const StateSpaceModel& closed_loop, const CostSpec& spec);

struct ControllerStructure {
  Eigen::Index n_xk = 0;
  Eigen::Index n_u = 1;
  Eigen::Index n_y = 1;
  bool fixed_zero_d = true;

  Eigen::Index parameter_count() const {
    return n_xk * n_xk + n_xk * n_y + n_u * n_xk + (fixed_zero_d ? 0 : n_u * n_y);
  }
  friend bool operator==(const ControllerStructure& a, const ControllerStructure& b) {
    return a.n_xk == b.n_xk && a.n_u == b.n_u && a.n_y == b.n_y && a.fixed_zero_d == b.fixed_zero_d;
  }
};

/// Flat parameters laid out as vec(Ak), vec(Bk), vec(Ck)[, vec(Dk)], each
/// matrix row-major.
class ControllerParam {
 public:
  ControllerParam() = default;
  ControllerParam(ControllerStructure structure, Vector values);
  static ControllerParam zero(const ControllerStructure& structure);
  static ControllerParam from_matrices(const ControllerStructure& structure, const Matrix& ak, const Matrix& bk,
                                       const Matrix& ck, const Matrix& dk);

  const ControllerStructure& structure() const noexcept { return structure_; }
  const Vector& values() const noexcept { return values_; }

  Matrix ak() const;
  Matrix bk() const;
  Matrix ck() const;
  /// Zero when the structure fixes Dk = 0.
  Matrix dk() const;
  /// Stacked [[Ak, Bk], [Ck, Dk]] of size (n_xk + n_u) x (n_xk + n_y).
  Matrix stacked() const;
  static ControllerParam from_stacked(const ControllerStructure& structure, const Matrix& m);

  StateSpaceModel to_state_space() const;

  friend bool operator==(const ControllerParam& a, const ControllerParam& b) {
    return a.structure_ == b.structure_ && a.values_.size() == b.values_.size() && a.values_ == b.values_;
  }

 private:
  ControllerStructure structure_;
  Vector values_;
};

/// Lower LFT of a local model (groups "u", "y") with the controller. The
/// result keeps the remaining groups and has n_x + n_xk states.
StateSpaceModel close_loop(const StateSpaceModel& local, const ControllerParam& k);

/// Closed-loop cost, +inf on instability or an ill-posed loop.
double local_cost(const StateSpaceModel& local, const ControllerParam& k, const CostSpec& spec);

/// Largest closed-loop spectral abscissa over the locals (+inf if ill-posed).
double max_abscissa(const ControllerParam& k, const std::vector<StateSpaceModel>& locals);

double multimodel_cost(const ControllerParam& k, const std::vector<StateSpaceModel>& locals, const CostSpec& spec,
                       Combine aggregate = Combine::kMax, Execution exec = Execution::kSerial);

struct SynthesisOptions {
  int restarts = 4;
  /// Objective evaluations per restart, both phases together.
  int budget = 3000;
  std::uint64_t seed = 0;
  double margin = 1e-3;
  Combine aggregate = Combine::kMax;
  /// Restart 0 starts here when set.
  std::optional<ControllerParam> warm_start;
  /// Skip the performance phase (stabilization only).
  bool stability_only = false;
  Execution execution = Execution::kParallel;
};

struct SynthesisResult {
  ControllerParam k;
  double cost = 0.0;
  double abscissa = 0.0;
  int evaluations = 0;
};

/// Throws SynthesisError when no restart stabilizes every local model, and
/// ConfigError for a structure without free parameters.
SynthesisResult synthesize(const std::vector<StateSpaceModel>& locals, const ControllerStructure& structure,
                           const CostSpec& spec, const SynthesisOptions& opts);

/// Gridded LPV design: a shared controller over all locals, then each
/// snapshot refined on its own local model starting from the shared one.
std::vector<ControllerParam> synthesize_gridded(const std::vector<StateSpaceModel>& locals,
                                                const ControllerStructure& structure, const CostSpec& spec,
                                                const SynthesisOptions& shared_opts, const SynthesisOptions& local_opts);

/// Per-point design of one snapshot, warm-started from `start`. Falls back to
/// `start` if refinement does not improve.
ControllerParam refine_snapshot(const StateSpaceModel& local, const ControllerParam& start, const CostSpec& spec,
                                const SynthesisOptions& opts);

void to_json(nlohmann::json& j, const ControllerParam& k);
void from_json(const nlohmann::json& j, ControllerParam& k);
void to_json(nlohmann::json& j, const CostSpec& spec);
void from_json(const nlohmann::json& j, CostSpec& spec);

}  // namespace gridbo

#endif  // GRIDBO_SYNTHESIS_HPP_
