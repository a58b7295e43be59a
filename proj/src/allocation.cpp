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

#include "gridbo/allocation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>

#include <nlohmann/json.hpp>

#include "gridbo/rng.hpp"

namespace gridbo {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr int kMaxDenseDim = 4;
constexpr double kFallbackSeparation = 1e-3;

nlohmann::json FiniteOrNull(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }
double NullAsInf(const nlohmann::json& j) { return j.is_null() ? kInf : j.get<double>(); }

std::size_t Nearest(const std::vector<GridPoint>& nodes, const GridPoint& p) {
  std::size_t best = 0;
  double dist = kInf;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const double d = (nodes[i].theta - p.theta).norm();
    if (d < dist) {
      dist = d;
      best = i;
    }
  }
  return best;
}

// Largest finite observation at least kFallbackSeparation (unit-box infinity
// norm) away from every selected point.
std::optional<std::size_t> WorstOffGrid(const ObservationSet& data, const std::vector<GridPoint>& selected,
                                        const Box& box) {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double v = data.values()[i];
    if (!std::isfinite(v) || (best && v <= data.values()[*best])) continue;
    const Vector u = box.to_unit(data.points()[i].theta);
    const bool clear = std::all_of(selected.begin(), selected.end(), [&](const GridPoint& p) {
      return (box.to_unit(p.theta) - u).lpNorm<Eigen::Infinity>() >= kFallbackSeparation;
    });
    if (clear) best = i;
  }
  return best;
}

}  // namespace

ControllerDesign ControllerDesign::robust(ControllerParam k) {
  ControllerDesign d;
  d.kind_ = PlantKind::kRobust;
  d.robust_ = std::move(k);
  return d;
}

ControllerDesign ControllerDesign::lpv(std::vector<ControllerParam> snapshots, RbfControllerField field) {
  if (snapshots.size() != field.nodes().size()) throw ShapeError("LPV design needs one snapshot per field node");
  ControllerDesign d;
  d.kind_ = PlantKind::kLpv;
  d.snapshots_ = std::move(snapshots);
  d.field_ = std::move(field);
  return d;
}

const ControllerStructure& ControllerDesign::structure() const {
  if (robust_) return robust_->structure();
  if (field_) return field_->structure();
  throw ShapeError("empty controller design");
}

ControllerParam ControllerDesign::at(const GridPoint& point) const {
  if (kind_ == PlantKind::kRobust) return robust_controller();
  return query_field(field(), point).k;
}

const ControllerParam& ControllerDesign::robust_controller() const {
  if (!robust_) throw ShapeError("design holds no robust controller");
  return *robust_;
}

const RbfControllerField& ControllerDesign::field() const {
  if (!field_) throw ShapeError("design holds no RBF field");
  return *field_;
}

double evaluate_cost(const LfrPlant& plant, const GridPoint& point, const ControllerParam& k, const CostSpec& spec) {
  plant.structure().check(point);
  try {
    return local_cost(evaluate_local(plant, point), k, spec);
  } catch (const WellPosednessError&) {
    return kInf;
  }
}

double evaluate_cost(const LfrPlant& plant, const GridPoint& point, const ControllerDesign& design,
                     const CostSpec& spec) {
  return evaluate_cost(plant, point, design.at(point), spec);
}

void Selection::add(GridPoint point, int iteration, double cost) {
  domain_.check(point);
  if (near(point)) throw DomainError("grid point duplicates a selected point");
  points_.push_back(std::move(point));
  history_.push_back({iteration, cost});
}

bool Selection::near(const GridPoint& point, double tol) const {
  return std::any_of(points_.begin(), points_.end(),
                     [&](const GridPoint& p) { return p.size() == point.size() && max_distance(p, point) <= tol; });
}

InitMode parse_init_mode(const std::string& text) {
  if (text == "corners") return InitMode::kCorners;
  if (text == "random") return InitMode::kRandom;
  if (text == "diagonal") return InitMode::kDiagonal;
  if (text == "explicit") return InitMode::kExplicit;
  throw ConfigError("unknown init mode '" + text + "'");
}

std::string to_string(InitMode mode) {
  switch (mode) {
    case InitMode::kCorners: return "corners";
    case InitMode::kRandom: return "random";
    case InitMode::kDiagonal: return "diagonal";
    case InitMode::kExplicit: return "explicit";
  }
  return "corners";
}

std::vector<GridPoint> initial_points(const DeltaStructure& domain, InitMode mode, std::size_t n0, std::uint64_t seed,
                                      const std::vector<GridPoint>& explicit_points) {
  const Box box = domain.box();
  std::vector<GridPoint> pts;
  switch (mode) {
    case InitMode::kCorners: pts = {GridPoint(box.lo), GridPoint(box.hi)}; break;
    case InitMode::kRandom:
      if (n0 < 1) throw DomainError("random initialization needs n0 >= 1");
      pts = sample_domain(domain, n0, seed);
      break;
    case InitMode::kDiagonal: pts = {GridPoint(box.lo), GridPoint(box.center()), GridPoint(box.hi)}; break;
    case InitMode::kExplicit:
      if (explicit_points.empty()) throw ConfigError("explicit initialization needs at least one point");
      pts = explicit_points;
      break;
  }
  for (const auto& p : pts) domain.check(p);
  return pts;
}

std::vector<StateSpaceModel> local_models(const LfrPlant& plant, const std::vector<GridPoint>& points,
                                          Execution exec) {
  return parallel_map<StateSpaceModel>(points.size(), [&](std::size_t i) { return evaluate_local(plant, points[i]); },
                                       exec);
}

ControllerDesign design_controller(const LfrPlant& plant, const CostSpec& spec, const std::vector<GridPoint>& points,
                                   const DesignOptions& opts, const std::optional<ControllerDesign>& warm) {
  if (points.empty()) throw DomainError("design needs at least one grid point");
  const auto locals = local_models(plant, points, opts.synthesis.execution);
  spec.validate(locals.front());

  if (plant.kind() == PlantKind::kRobust) {
    SynthesisOptions so = opts.synthesis;
    if (warm) so.warm_start = warm->at(points.front());
    return ControllerDesign::robust(synthesize(locals, opts.structure, spec, so).k);
  }

  const Box box = plant.domain();
  if (!warm || warm->kind() != PlantKind::kLpv) {
    auto snapshots = synthesize_gridded(locals, opts.structure, spec, opts.synthesis, opts.snapshot);
    auto field = fit_field(snapshots, points, box);
    return ControllerDesign::lpv(std::move(snapshots), std::move(field));
  }

  // Snapshots are independent per point: keep those already designed and
  // design only the new points, starting from the current field.
  const auto& old_nodes = warm->field().nodes();
  std::vector<ControllerParam> snapshots(points.size());
  std::vector<std::size_t> fresh;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto it = std::find(old_nodes.begin(), old_nodes.end(), points[i]);
    if (it != old_nodes.end()) {
      snapshots[i] = warm->snapshots()[static_cast<std::size_t>(it - old_nodes.begin())];
    } else {
      fresh.push_back(i);
    }
  }
  const auto designed = parallel_map<ControllerParam>(
      fresh.size(),
      [&](std::size_t f) {
        const std::size_t i = fresh[f];
        SynthesisOptions so = opts.snapshot;
        so.seed = derive_seed(opts.snapshot.seed, "snapshot", i);
        so.execution = Execution::kSerial;
        so.warm_start = warm->snapshots()[Nearest(old_nodes, points[i])];
        // Start from the field value or an existing snapshot, whichever
        // does best here; a fresh design only when none of them stabilizes.
        ControllerParam start = warm->at(points[i]);
        double start_cost = local_cost(locals[i], start, spec);
        for (const auto& k : warm->snapshots()) {
          const double c = local_cost(locals[i], k, spec);
          if (c < start_cost) {
            start = k;
            start_cost = c;
          }
        }
        return refine_snapshot(locals[i], start, spec, so);
      },
      opts.synthesis.execution);
  for (std::size_t f = 0; f < fresh.size(); ++f) snapshots[fresh[f]] = designed[f];
  auto field = fit_field(snapshots, points, box);
  return ControllerDesign::lpv(std::move(snapshots), std::move(field));
}

InitResult initialize(const LfrPlant& plant, const CostSpec& spec, const std::vector<GridPoint>& points,
                      const DesignOptions& opts) {
  InitResult out{Selection(plant.structure()), design_controller(plant, spec, points, opts)};
  for (const auto& p : points) out.selection.add(p, 0, evaluate_cost(plant, p, out.design, spec));
  return out;
}

InitResult random_init(const LfrPlant& plant, std::size_t n0, const CostSpec& spec, const DesignOptions& opts,
                       std::uint64_t seed) {
  return initialize(plant, spec, initial_points(plant.structure(), InitMode::kRandom, n0, seed), opts);
}

AllocationResult allocate(const LfrPlant& plant, const CostSpec& spec, const Selection& theta0,
                          const ControllerDesign& k0, const AllocationOptions& opts) {
  if (theta0.size() == 0) throw DomainError("allocation needs a non-empty initial selection");
  opts.bo.validate();
  if (opts.early_stop_patience < 0 || !(opts.early_stop_ratio >= 0.0)) {
    throw ConfigError("early stopping needs patience >= 0 and a non-negative ratio");
  }
  AllocationResult out{theta0, k0, {}, {}, false};
  const Box box = plant.domain();
  int stalls = 0;

  for (int it = 0; out.selection.size() < opts.n_target; ++it) {
    const ControllerDesign current = out.design;
    auto cost = [&](const GridPoint& p) { return evaluate_cost(plant, p, current, spec); };

    // Fresh observations for the current controller: the selection itself
    // plus uniform random points.
    const auto& sel = out.selection.points();
    std::vector<GridPoint> seeds = sel;
    for (auto& p : sample_domain(plant.structure(), static_cast<std::size_t>(opts.bo.n_initial),
                                 derive_seed(opts.seed, "observations", static_cast<std::uint64_t>(it)))) {
      seeds.push_back(std::move(p));
    }
    const auto values = parallel_map<double>(seeds.size(), [&](std::size_t i) { return cost(seeds[i]); },
                                             opts.execution);
    ObservationSet data;
    double previous_max = 0.0;
    for (std::size_t i = 0; i < seeds.size(); ++i) {
      const bool selected = i < sel.size();
      data.add(seeds[i], values[i], selected ? ObservationTag::kAllocation : ObservationTag::kInitialRandom);
      if (selected) previous_max = std::max(previous_max, values[i]);
    }

    AcquisitionConfig bo = opts.bo;
    bo.seed = derive_seed(opts.seed, "bo", static_cast<std::uint64_t>(it));
    BoResult found = bo_find_most_informative(cost, box, data, bo);
    int evaluations = found.cost_evaluations;
    if (out.selection.near(found.theta_star)) {
      bo.seed = derive_seed(opts.seed, "bo-requery", static_cast<std::uint64_t>(it));
      found = bo_find_most_informative(cost, box, data, bo);
      evaluations += found.cost_evaluations;
      if (out.selection.near(found.theta_star)) {
        // The worst point sits on the grid. With early stopping on, that ends
        // the run; otherwise fall back to the worst observation off the grid.
        const auto fallback = opts.early_stop_patience > 0
                                  ? std::nullopt
                                  : WorstOffGrid(found.data, out.selection.points(), box);
        if (!fallback) {
          out.stopped_early = true;
          break;
        }
        found.theta_star = found.data.points()[*fallback];
        found.predicted = found.data.values()[*fallback];
      }
    }

    if (opts.early_stop_patience > 0) {
      const bool improving =
          found.unstable || found.predicted - previous_max >= opts.early_stop_ratio * std::abs(previous_max);
      stalls = improving ? 0 : stalls + 1;
      if (stalls >= opts.early_stop_patience) {
        out.stopped_early = true;
        break;
      }
    }

    AllocationTraceRow row;
    row.iteration = it;
    row.theta = found.theta_star;
    row.j_before = cost(found.theta_star);
    row.j_previous_max = previous_max;
    row.predicted = found.predicted;
    row.bo_evaluations = evaluations;
    out.selection.add(found.theta_star, it + 1, row.j_before);
    row.selection_size = out.selection.size();
    out.bo_traces.push_back(found.trace);

    DesignOptions design = opts.design;
    design.synthesis.seed = derive_seed(opts.seed, "synthesis", static_cast<std::uint64_t>(it));
    design.snapshot.seed = derive_seed(opts.seed, "snapshot", static_cast<std::uint64_t>(it));
    try {
      out.design = design_controller(plant, spec, out.selection.points(), design, current);
    } catch (const SynthesisError& e) {
      row.j_after = kInf;
      out.trace.push_back(row);
      throw AllocationError(std::string("allocation iteration ") + std::to_string(it) + ": " + e.what(),
                            std::move(out));
    }
    row.j_after = evaluate_cost(plant, found.theta_star, out.design, spec);
    out.trace.push_back(row);
  }
  return out;
}

std::optional<Matrix> common_lyapunov_heuristic(const std::vector<Matrix>& a_list) {
  if (a_list.empty()) throw DomainError("common Lyapunov test needs at least one matrix");
  const Eigen::Index n = a_list.front().rows();
  Matrix x = Matrix::Zero(n, n);
  for (const auto& a : a_list) {
    if (a.rows() != n || a.cols() != n) throw ShapeError("common Lyapunov test: matrices differ in size");
    if (!(spectral_abscissa(a) < 0.0)) throw StabilityError("common Lyapunov test: matrix is not Hurwitz");
    x += lyapunov_solve(a, Matrix::Identity(n, n));
  }
  x /= static_cast<double>(a_list.size());
  x = 0.5 * (x + x.transpose());
  if (!(Eigen::SelfAdjointEigenSolver<Matrix>(x).eigenvalues().minCoeff() > 0.0)) return std::nullopt;
  for (const auto& a : a_list) {
    const Matrix l = a.transpose() * x + x * a;
    if (!(Eigen::SelfAdjointEigenSolver<Matrix>(0.5 * (l + l.transpose())).eigenvalues().maxCoeff() < -1e-9)) {
      return std::nullopt;
    }
  }
  return x;
}

std::vector<GridPoint> sweep_points(const Box& box, int density) {
  if (density < 2) throw DomainError("sweep density must be at least 2");
  const Eigen::Index d = box.dim();
  std::vector<GridPoint> pts;
  if (d <= kMaxDenseDim) {
    std::size_t total = 1;
    for (Eigen::Index i = 0; i < d; ++i) total *= static_cast<std::size_t>(density);
    pts.reserve(total);
    for (std::size_t idx = 0; idx < total; ++idx) {
      Vector u(d);
      std::size_t rest = idx;
      // Last coordinate varies fastest.
      for (Eigen::Index i = d - 1; i >= 0; --i) {
        u(i) = static_cast<double>(rest % static_cast<std::size_t>(density)) / (density - 1);
        rest /= static_cast<std::size_t>(density);
      }
      pts.emplace_back(box.from_unit(u).cwiseMax(box.lo).cwiseMin(box.hi));
    }
    return pts;
  }
  // Latin hypercube: one sample per stratum along every axis.
  const auto n = static_cast<std::size_t>(density) * static_cast<std::size_t>(density);
  Rng rng(derive_seed(0, "latin-hypercube", static_cast<std::uint64_t>(density)));
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  Matrix u(static_cast<Eigen::Index>(n), d);
  std::vector<std::size_t> perm(n);
  for (Eigen::Index i = 0; i < d; ++i) {
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    for (std::size_t k = 0; k < n; ++k) {
      u(static_cast<Eigen::Index>(k), i) = (static_cast<double>(perm[k]) + u01(rng)) / static_cast<double>(n);
    }
  }
  for (std::size_t k = 0; k < n; ++k) {
    pts.emplace_back(box.from_unit(u.row(static_cast<Eigen::Index>(k)).transpose()));
  }
  return pts;
}

SweepResult worst_case_sweep(const LfrPlant& plant, const ControllerDesign& design, const CostSpec& spec,
                             int density, Execution exec) {
  SweepResult out;
  out.points = sweep_points(plant.domain(), density);
  out.costs = parallel_map<double>(
      out.points.size(), [&](std::size_t i) { return evaluate_cost(plant, out.points[i], design, spec); }, exec);
  std::size_t worst = 0;
  for (std::size_t i = 0; i < out.costs.size(); ++i) {
    if (!std::isfinite(out.costs[i])) ++out.unstable_count;
    if (out.costs[i] > out.costs[worst]) worst = i;
  }
  out.theta_worst = out.points[worst];
  out.j_worst = out.costs[worst];
  return out;
}

void write_trace_csv(std::ostream& os, const std::vector<AllocationTraceRow>& trace, Eigen::Index dim) {
  for (const auto& r : trace) {
    if (r.theta.size() != dim) throw ShapeError("write_trace_csv: point dimension differs from the header");
  }
  os << "iteration";
  for (Eigen::Index d = 0; d < dim; ++d) os << ",theta_" << d + 1;
  os << ",J_before,J_after,n_theta,J_prev_max,predicted,bo_evaluations\n";
  const auto old = os.precision(17);
  for (const auto& r : trace) {
    os << r.iteration;
    for (Eigen::Index d = 0; d < dim; ++d) os << ',' << r.theta[d];
    os << ',' << r.j_before << ',' << r.j_after << ',' << r.selection_size << ',' << r.j_previous_max << ','
       << r.predicted << ',' << r.bo_evaluations << '\n';
  }
  os.precision(old);
}

void write_sweep_csv(std::ostream& os, const SweepResult& sweep) {
  const Eigen::Index dim = sweep.points.empty() ? 0 : sweep.points.front().size();
  for (Eigen::Index d = 0; d < dim; ++d) os << "theta_" << d + 1 << ',';
  os << "J\n";
  const auto old = os.precision(17);
  for (std::size_t i = 0; i < sweep.points.size(); ++i) {
    for (Eigen::Index d = 0; d < dim; ++d) os << sweep.points[i][d] << ',';
    os << sweep.costs[i] << '\n';
  }
  os.precision(old);
}

void to_json(nlohmann::json& j, const ControllerDesign& design) {
  if (design.kind() == PlantKind::kRobust) {
    j = nlohmann::json{{"kind", "robust"}, {"controller", design.robust_controller()}};
    return;
  }
  nlohmann::json snaps = nlohmann::json::array();
  for (const auto& k : design.snapshots()) snaps.push_back(k);
  j = nlohmann::json{{"kind", "lpv"}, {"snapshots", snaps}, {"field", design.field()}};
}

void from_json(const nlohmann::json& j, ControllerDesign& design) {
  try {
    const std::string kind = j.value("kind", "robust");
    if (kind == "robust") {
      design = ControllerDesign::robust(j.contains("controller") ? j.at("controller").get<ControllerParam>()
                                                                 : j.get<ControllerParam>());
    } else if (kind == "lpv") {
      std::vector<ControllerParam> snaps;
      for (const auto& k : j.at("snapshots")) snaps.push_back(k.get<ControllerParam>());
      design = ControllerDesign::lpv(std::move(snaps), j.at("field").get<RbfControllerField>());
    } else {
      throw ConfigError("controller kind must be 'robust' or 'lpv'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("controller design JSON: ") + e.what());
  } catch (const ShapeError& e) {
    throw ConfigError(std::string("controller design JSON: ") + e.what());
  }
}

void to_json(nlohmann::json& j, const Selection& selection) {
  nlohmann::json pts = nlohmann::json::array(), hist = nlohmann::json::array();
  for (std::size_t i = 0; i < selection.size(); ++i) {
    pts.push_back(selection.points()[i]);
    hist.push_back({{"iteration", selection.history()[i].iteration}, {"cost", FiniteOrNull(selection.history()[i].cost)}});
  }
  j = nlohmann::json{{"domain", selection.domain()}, {"points", pts}, {"history", hist}};
}

void from_json(const nlohmann::json& j, Selection& selection) {
  try {
    Selection out(j.at("domain").get<DeltaStructure>());
    const auto& pts = j.at("points");
    const auto& hist = j.contains("history") ? j.at("history") : nlohmann::json::array();
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const bool has = i < hist.size();
      out.add(pts[i].get<GridPoint>(), has ? hist[i].value("iteration", 0) : 0,
              has && hist[i].contains("cost") ? NullAsInf(hist[i].at("cost")) : 0.0);
    }
    selection = std::move(out);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("selection JSON: ") + e.what());
  } catch (const DomainError& e) {
    throw ConfigError(std::string("selection JSON: ") + e.what());
  }
}

}  // namespace gridbo
