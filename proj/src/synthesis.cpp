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

#include "gridbo/synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <nlohmann/json.hpp>

#include "gridbo/errors.hpp"
#include "gridbo/nelder_mead.hpp"
#include "gridbo/rng.hpp"

namespace gridbo {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double TermNorm(const StateSpaceModel& sys, NormKind kind, double hinf_tol) {
  switch (kind) {
    case NormKind::kHinf: return hinf_norm(sys, hinf_tol);
    case NormKind::kH2: return h2_norm(sys);
    case NormKind::kGenH2: return gen_h2_norm(sys);
  }
  return kInf;
}

Matrix Unpack(const Vector& v, Eigen::Index& offset, Eigen::Index rows, Eigen::Index cols) {
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = v(offset++);
  return m;
}

void Pack(const Matrix& m, Vector& v, Eigen::Index& offset) {
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) v(offset++) = m(i, j);
}

double InitialScale(const std::vector<StateSpaceModel>& locals) {
  const auto& a = locals.front().A();
  if (a.rows() == 0) return 0.1;
  const double s = 0.1 * a.norm() / static_cast<double>(a.rows());
  return s > 0.0 ? s : 0.1;
}

struct RestartOutcome {
  Vector x;
  double cost = kInf;
  double abscissa = kInf;
  int evaluations = 0;
};

}  // namespace

std::string to_string(NormKind kind) {
  switch (kind) {
    case NormKind::kHinf: return "hinf";
    case NormKind::kH2: return "h2";
    case NormKind::kGenH2: return "gen_h2";
  }
  return "unknown";
}

NormKind parse_norm_kind(const std::string& text) {
  if (text == "hinf") return NormKind::kHinf;
  if (text == "h2") return NormKind::kH2;
  if (text == "gen_h2") return NormKind::kGenH2;
  throw ConfigError("unknown norm '" + text + "' (expected hinf, h2 or gen_h2)");
}

void CostSpec::validate(const StateSpaceModel& sys) const {
  if (terms.empty()) throw ConfigError("cost specification has no terms");
  for (const auto& t : terms) {
    if (!(t.weight >= 0.0) || !std::isfinite(t.weight)) throw ConfigError("cost weights must be finite and >= 0");
    if (t.inputs.empty() || t.outputs.empty()) throw ConfigError("cost term needs input and output groups");
    for (const auto& g : t.inputs)
      if (!sys.has_input_group(g)) throw ConfigError("cost term references missing input group '" + g + "'");
    for (const auto& g : t.outputs)
      if (!sys.has_output_group(g)) throw ConfigError("cost term references missing output group '" + g + "'");
  }
  if (!(hinf_tol > 0.0)) throw ConfigError("hinf_tol must be positive");
}

double closed_loop_cost(const StateSpaceModel& cl, const CostSpec& spec) {
  if (cl.nx() > 0 && !(spectral_abscissa(cl.A()) < 0.0)) return kInf;
  double total = 0.0;
  for (const auto& t : spec.terms) {
    if (t.weight == 0.0) continue;
    double v;
    try {
      v = t.weight * TermNorm(cl.subsystem(t.inputs, t.outputs), t.norm, spec.hinf_tol);
    } catch (const StabilityError&) {
      return kInf;
    } catch (const InfiniteNormError&) {
      return kInf;
    } catch (const NumericalError&) {
      // Nearly marginal loops where the norm computation breaks down.
      return kInf;
    } catch (const ResonanceError&) {
      return kInf;
    }
    total = spec.combine == Combine::kMax ? std::max(total, v) : total + v;
  }
  return total;
}

ControllerParam::ControllerParam(ControllerStructure structure, Vector values)
    : structure_(structure), values_(std::move(values)) {
  if (structure_.n_xk < 0 || structure_.n_u < 0 || structure_.n_y < 0) throw ShapeError("negative controller dimension");
  if (values_.size() != structure_.parameter_count()) {
    throw ShapeError("controller has " + std::to_string(values_.size()) + " parameters, structure needs " +
                     std::to_string(structure_.parameter_count()));
  }
  if (!values_.allFinite()) throw DomainError("controller parameters must be finite");
}

ControllerParam ControllerParam::zero(const ControllerStructure& s) {
  return ControllerParam(s, Vector::Zero(s.parameter_count()));
}

ControllerParam ControllerParam::from_matrices(const ControllerStructure& s, const Matrix& ak, const Matrix& bk,
                                               const Matrix& ck, const Matrix& dk) {
  if (ak.rows() != s.n_xk || ak.cols() != s.n_xk || bk.rows() != s.n_xk || bk.cols() != s.n_y ||
      ck.rows() != s.n_u || ck.cols() != s.n_xk || dk.rows() != s.n_u || dk.cols() != s.n_y) {
    throw ShapeError("controller matrices do not match the structure");
  }
  if (s.fixed_zero_d && !dk.isZero(0.0)) throw DomainError("structure fixes Dk = 0");
  Vector v(s.parameter_count());
  Eigen::Index off = 0;
  Pack(ak, v, off);
  Pack(bk, v, off);
  Pack(ck, v, off);
  if (!s.fixed_zero_d) Pack(dk, v, off);
  return ControllerParam(s, std::move(v));
}

Matrix ControllerParam::ak() const {
  Eigen::Index off = 0;
  return Unpack(values_, off, structure_.n_xk, structure_.n_xk);
}

Matrix ControllerParam::bk() const {
  Eigen::Index off = structure_.n_xk * structure_.n_xk;
  return Unpack(values_, off, structure_.n_xk, structure_.n_y);
}

Matrix ControllerParam::ck() const {
  Eigen::Index off = structure_.n_xk * (structure_.n_xk + structure_.n_y);
  return Unpack(values_, off, structure_.n_u, structure_.n_xk);
}

Matrix ControllerParam::dk() const {
  if (structure_.fixed_zero_d) return Matrix::Zero(structure_.n_u, structure_.n_y);
  Eigen::Index off = structure_.n_xk * (structure_.n_xk + structure_.n_y + structure_.n_u);
  return Unpack(values_, off, structure_.n_u, structure_.n_y);
}

Matrix ControllerParam::stacked() const {
  const auto& s = structure_;
  Matrix m(s.n_xk + s.n_u, s.n_xk + s.n_y);
  m << ak(), bk(), ck(), dk();
  return m;
}

ControllerParam ControllerParam::from_stacked(const ControllerStructure& s, const Matrix& m) {
  if (m.rows() != s.n_xk + s.n_u || m.cols() != s.n_xk + s.n_y) throw ShapeError("stacked controller has wrong size");
  const Matrix dk = s.fixed_zero_d ? Matrix::Zero(s.n_u, s.n_y) : Matrix(m.bottomRightCorner(s.n_u, s.n_y));
  return from_matrices(s, m.topLeftCorner(s.n_xk, s.n_xk), m.topRightCorner(s.n_xk, s.n_y),
                       m.bottomLeftCorner(s.n_u, s.n_xk), dk);
}

StateSpaceModel ControllerParam::to_state_space() const { return StateSpaceModel(ak(), bk(), ck(), dk()); }

StateSpaceModel close_loop(const StateSpaceModel& local, const ControllerParam& k) {
  if (!local.has_input_group("u") || !local.has_output_group("y")) {
    throw ShapeError("local model needs 'u' and 'y' channel groups");
  }
  if (local.input_group("u").size != k.structure().n_u || local.output_group("y").size != k.structure().n_y) {
    throw ShapeError("controller dimensions do not match the plant's control channels");
  }
  return redheffer_star(local, k.to_state_space());
}

double local_cost(const StateSpaceModel& local, const ControllerParam& k, const CostSpec& spec) {
  try {
    return closed_loop_cost(close_loop(local, k), spec);
  } catch (const WellPosednessError&) {
    return kInf;
  }
}

double max_abscissa(const ControllerParam& k, const std::vector<StateSpaceModel>& locals) {
  double worst = -kInf;
  for (const auto& local : locals) {
    try {
      worst = std::max(worst, spectral_abscissa(close_loop(local, k).A()));
    } catch (const WellPosednessError&) {
      return kInf;
    }
  }
  return worst;
}

double multimodel_cost(const ControllerParam& k, const std::vector<StateSpaceModel>& locals, const CostSpec& spec,
                       Combine aggregate, Execution exec) {
  if (locals.empty()) throw DomainError("multimodel cost needs at least one local model");
  const auto costs =
      parallel_map<double>(locals.size(), [&](std::size_t i) { return local_cost(locals[i], k, spec); }, exec);
  double total = 0.0;
  for (double c : costs) {
    if (!std::isfinite(c)) return kInf;
    total = aggregate == Combine::kMax ? std::max(total, c) : total + c;
  }
  return total;
}

SynthesisResult synthesize(const std::vector<StateSpaceModel>& locals, const ControllerStructure& structure,
                           const CostSpec& spec, const SynthesisOptions& opts) {
  if (locals.empty()) throw DomainError("synthesis needs at least one local model");
  if (opts.budget < 1 || opts.restarts < 1) throw DomainError("synthesis budget and restarts must be positive");
  for (const auto& l : locals) (void)close_loop(l, ControllerParam::zero(structure));
  if (opts.warm_start && !(opts.warm_start->structure() == structure)) {
    throw ShapeError("warm start has a different controller structure");
  }

  const double scale = InitialScale(locals);
  const Eigen::Index np = structure.parameter_count();
  if (np == 0) throw ConfigError("controller structure has no free parameters");
  auto param = [&](const Vector& x) { return ControllerParam(structure, x); };
  auto abscissa = [&](const Vector& x) {
    if (!x.allFinite()) return kInf;
    return max_abscissa(param(x), locals);
  };
  auto cost = [&](const Vector& x) {
    if (!x.allFinite()) return kInf;
    return multimodel_cost(param(x), locals, spec, opts.aggregate, Execution::kSerial);
  };

  const auto outcomes = parallel_map<RestartOutcome>(
      static_cast<std::size_t>(opts.restarts),
      [&](std::size_t r) {
        Vector x0(np);
        if (r == 0 && opts.warm_start) {
          x0 = opts.warm_start->values();
        } else {
          Rng rng(derive_seed(opts.seed, "synthesis", r));
          std::normal_distribution<double> n0(0.0, scale);
          for (Eigen::Index i = 0; i < np; ++i) x0(i) = n0(rng);
        }
        RestartOutcome out;
        NelderMeadOptions p1;
        p1.max_evaluations = opts.stability_only ? opts.budget : std::max(1, opts.budget / 2);
        p1.initial_step = scale;
        p1.ftol = 1e-10;
        p1.stop = [&](double v) { return v < -opts.margin; };
        const auto stab = nelder_mead(abscissa, x0, p1);
        out.evaluations = stab.evaluations;
        out.x = stab.x;
        out.abscissa = stab.value;
        if (!(stab.value < 0.0)) return out;

        out.cost = cost(stab.x);
        ++out.evaluations;
        const int left = opts.budget - out.evaluations;
        if (opts.stability_only || left <= 0) return out;
        NelderMeadOptions p2;
        p2.max_evaluations = left;
        p2.initial_step = std::max(0.1 * stab.x.cwiseAbs().maxCoeff(), 1e-3 * scale);
        p2.ftol = 1e-9;
        const auto perf = nelder_mead(cost, stab.x, p2);
        out.evaluations += perf.evaluations;
        if (perf.value < out.cost) {
          out.cost = perf.value;
          out.x = perf.x;
          out.abscissa = max_abscissa(param(perf.x), locals);
        }
        return out;
      },
      opts.execution);

  std::size_t winner = outcomes.size();
  double best_abscissa = kInf;
  int evaluations = 0;
  for (std::size_t r = 0; r < outcomes.size(); ++r) {
    evaluations += outcomes[r].evaluations;
    best_abscissa = std::min(best_abscissa, outcomes[r].abscissa);
    if (!std::isfinite(outcomes[r].cost)) continue;
    if (winner == outcomes.size() || outcomes[r].cost < outcomes[winner].cost) winner = r;
  }
  if (winner == outcomes.size()) throw SynthesisError(best_abscissa);
  return SynthesisResult{param(outcomes[winner].x), outcomes[winner].cost, outcomes[winner].abscissa, evaluations};
}

ControllerParam refine_snapshot(const StateSpaceModel& local, const ControllerParam& start, const CostSpec& spec,
                                const SynthesisOptions& opts) {
  const ControllerStructure& s = start.structure();
  auto cost = [&](const Vector& x) {
    if (!x.allFinite()) return kInf;
    return local_cost(local, ControllerParam(s, x), spec);
  };
  const double start_cost = cost(start.values());
  NelderMeadOptions nm;
  nm.max_evaluations = std::max(1, opts.budget);
  nm.initial_step = std::max(0.05 * start.values().cwiseAbs().maxCoeff(), 1e-3);
  const auto res = nelder_mead(cost, start.values(), nm);
  if (std::isfinite(res.value) && res.value < start_cost) return ControllerParam(s, res.x);
  if (!std::isfinite(start_cost)) {
    // The start does not stabilize this point: fall back to a full design.
    return synthesize({local}, s, spec, opts).k;
  }
  return start;
}

std::vector<ControllerParam> synthesize_gridded(const std::vector<StateSpaceModel>& locals,
                                                const ControllerStructure& structure, const CostSpec& spec,
                                                const SynthesisOptions& shared_opts,
                                                const SynthesisOptions& local_opts) {
  const ControllerParam shared = synthesize(locals, structure, spec, shared_opts).k;
  return parallel_map<ControllerParam>(
      locals.size(),
      [&](std::size_t i) {
        SynthesisOptions o = local_opts;
        o.seed = derive_seed(local_opts.seed, "snapshot", i);
        o.execution = Execution::kSerial;
        return refine_snapshot(locals[i], shared, spec, o);
      },
      local_opts.execution);
}

void to_json(nlohmann::json& j, const ControllerParam& k) {
  const auto& s = k.structure();
  j = nlohmann::json{{"n_xk", s.n_xk},          {"n_u", s.n_u},
                     {"n_y", s.n_y},            {"fixed_zero_D", s.fixed_zero_d},
                     {"A_k", matrix_to_json(k.ak())}, {"B_k", matrix_to_json(k.bk())},
                     {"C_k", matrix_to_json(k.ck())}, {"D_k", matrix_to_json(k.dk())}};
}

void from_json(const nlohmann::json& j, ControllerParam& k) {
  try {
    ControllerStructure s;
    s.n_xk = j.at("n_xk").get<Eigen::Index>();
    s.n_u = j.at("n_u").get<Eigen::Index>();
    s.n_y = j.at("n_y").get<Eigen::Index>();
    s.fixed_zero_d = j.value("fixed_zero_D", false);
    k = ControllerParam::from_matrices(s, matrix_from_json(j.at("A_k"), s.n_xk, s.n_xk),
                                       matrix_from_json(j.at("B_k"), s.n_xk, s.n_y),
                                       matrix_from_json(j.at("C_k"), s.n_u, s.n_xk),
                                       matrix_from_json(j.at("D_k"), s.n_u, s.n_y));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("controller JSON: ") + e.what());
  }
}

void to_json(nlohmann::json& j, const CostSpec& spec) {
  nlohmann::json terms = nlohmann::json::array();
  for (const auto& t : spec.terms) {
    terms.push_back({{"inputs", t.inputs}, {"outputs", t.outputs}, {"norm", to_string(t.norm)}, {"weight", t.weight}});
  }
  j = nlohmann::json{
      {"terms", terms}, {"combine", spec.combine == Combine::kMax ? "max" : "sum"}, {"hinf_tol", spec.hinf_tol}};
}

void from_json(const nlohmann::json& j, CostSpec& spec) {
  try {
    CostSpec out;
    for (const auto& t : j.at("terms")) {
      CostTerm term;
      term.inputs = t.at("inputs").get<std::vector<std::string>>();
      term.outputs = t.at("outputs").get<std::vector<std::string>>();
      term.norm = parse_norm_kind(t.value("norm", std::string("hinf")));
      term.weight = t.value("weight", 1.0);
      out.terms.push_back(std::move(term));
    }
    const std::string combine = j.value("combine", std::string("max"));
    if (combine != "max" && combine != "sum") throw ConfigError("combine must be 'max' or 'sum'");
    out.combine = combine == "max" ? Combine::kMax : Combine::kSum;
    out.hinf_tol = j.value("hinf_tol", out.hinf_tol);
    spec = std::move(out);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("cost JSON: ") + e.what());
  }
}

}  // namespace gridbo
