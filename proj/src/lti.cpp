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

#include "gridbo/lti.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <nlohmann/json.hpp>

#include "gridbo/errors.hpp"

namespace gridbo {

namespace {

constexpr double kResonanceRcond = 1e-12;
constexpr double kWellPosedRcond = 1e-12;
constexpr double kImagAxisTol = 1e-8;

std::vector<ChannelGroup> DefaultGroups(const char* name, Eigen::Index n) {
  if (n == 0) return {};
  return {ChannelGroup{name, 0, n}};
}

void CheckGroups(const std::vector<ChannelGroup>& groups, Eigen::Index n, const char* side) {
  std::vector<int> covered(static_cast<std::size_t>(n), 0);
  for (std::size_t i = 0; i < groups.size(); ++i) {
    const auto& g = groups[i];
    if (g.name.empty()) throw ShapeError(std::string(side) + " group with empty name");
    for (std::size_t j = 0; j < i; ++j) {
      if (groups[j].name == g.name) throw ShapeError(std::string(side) + " group '" + g.name + "' repeated");
    }
    if (g.start < 0 || g.size < 0 || g.start + g.size > n) {
      throw ShapeError(std::string(side) + " group '" + g.name + "' out of range");
    }
    for (Eigen::Index k = g.start; k < g.start + g.size; ++k) ++covered[static_cast<std::size_t>(k)];
  }
  for (int c : covered) {
    if (c != 1) throw ShapeError(std::string(side) + " groups must be disjoint and cover every channel");
  }
}

const ChannelGroup* FindGroup(const std::vector<ChannelGroup>& groups, std::string_view name) {
  for (const auto& g : groups) {
    if (g.name == name) return &g;
  }
  return nullptr;
}

// Groups of `groups` except `skip`, re-based as if the skipped channels were
// removed. Channel order is preserved.
std::vector<ChannelGroup> DropGroup(const std::vector<ChannelGroup>& groups, std::string_view skip) {
  std::vector<ChannelGroup> sorted = groups;
  std::sort(sorted.begin(), sorted.end(),
            [](const ChannelGroup& a, const ChannelGroup& b) { return a.start < b.start; });
  std::vector<ChannelGroup> out;
  Eigen::Index next = 0;
  for (const auto& g : sorted) {
    if (g.name == skip) continue;
    out.push_back(ChannelGroup{g.name, next, g.size});
    next += g.size;
  }
  return out;
}

std::vector<Eigen::Index> IndicesExcept(Eigen::Index n, const ChannelGroup& g) {
  std::vector<Eigen::Index> idx;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (i < g.start || i >= g.start + g.size) idx.push_back(i);
  }
  return idx;
}

std::vector<Eigen::Index> Range(const ChannelGroup& g) {
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(g.size));
  std::iota(idx.begin(), idx.end(), g.start);
  return idx;
}

Matrix Rows(const Matrix& m, const std::vector<Eigen::Index>& rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = m.row(rows[i]);
  return out;
}

Matrix Cols(const Matrix& m, const std::vector<Eigen::Index>& cols) {
  Matrix out(m.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < cols.size(); ++i) out.col(static_cast<Eigen::Index>(i)) = m.col(cols[i]);
  return out;
}

Matrix Block(const Matrix& m, const std::vector<Eigen::Index>& rows, const std::vector<Eigen::Index>& cols) {
  return Cols(Rows(m, rows), cols);
}

double SigmaMax(const ComplexMatrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<ComplexMatrix> svd(m);
  return svd.singularValues()(0);
}

double SigmaMax(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

Matrix InvertChecked(const Matrix& m, const char* what) {
  Eigen::PartialPivLU<Matrix> lu(m);
  if (!(lu.rcond() >= kWellPosedRcond)) throw WellPosednessError(std::string("ill-posed interconnection: ") + what + " is singular");
  return lu.inverse();
}

// Frequencies omega >= 0 at which the Hamiltonian of sys/gamma has
// eigenvalues on the imaginary axis.
std::vector<double> ImaginaryAxisCrossings(const StateSpaceModel& sys, double gamma) {
  const Eigen::Index n = sys.nx();
  const Matrix cg = sys.C() / gamma;
  const Matrix dg = sys.D() / gamma;
  const Matrix r = Matrix::Identity(sys.nu(), sys.nu()) - dg.transpose() * dg;
  const Matrix s = Matrix::Identity(sys.ny(), sys.ny()) - dg * dg.transpose();
  const Eigen::LDLT<Matrix> r_ldlt(r);
  const Eigen::LDLT<Matrix> s_ldlt(s);
  const Matrix h11 = sys.A() + sys.B() * r_ldlt.solve(dg.transpose() * cg);
  Matrix h(2 * n, 2 * n);
  h.topLeftCorner(n, n) = h11;
  h.topRightCorner(n, n) = sys.B() * r_ldlt.solve(sys.B().transpose());
  h.bottomLeftCorner(n, n) = -cg.transpose() * s_ldlt.solve(cg);
  h.bottomRightCorner(n, n) = -h11.transpose();

  Eigen::EigenSolver<Matrix> es(h, false);
  if (es.info() != Eigen::Success) throw NumericalError("Hamiltonian eigenvalue iteration did not converge");
  const double tol = kImagAxisTol * std::max(h.norm(), 1.0);
  std::vector<double> omegas;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    const auto lambda = es.eigenvalues()(i);
    if (std::abs(lambda.real()) <= tol && lambda.imag() >= 0.0) omegas.push_back(lambda.imag());
  }
  std::sort(omegas.begin(), omegas.end());
  return omegas;
}

// sigma_max(D) + 2 * (sum of Hankel singular values).
double GramianUpperBound(const StateSpaceModel& sys) {
  const Matrix wc = lyapunov_solve(sys.A().transpose(), sys.B() * sys.B().transpose());
  const Matrix wo = lyapunov_solve(sys.A(), sys.C().transpose() * sys.C());
  Eigen::EigenSolver<Matrix> es(wc * wo, false);
  double hsv_sum = 0.0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    hsv_sum += std::sqrt(std::max(es.eigenvalues()(i).real(), 0.0));
  }
  return SigmaMax(sys.D()) + 2.0 * hsv_sum;
}

void CheckFeedthroughZero(const StateSpaceModel& sys) {
  const double scale = 1.0 + sys.C().cwiseAbs().maxCoeff();
  if (sys.D().size() > 0 && sys.D().cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw InfiniteNormError("H2 norm is infinite: non-zero feedthrough D");
  }
}

void CheckStable(const StateSpaceModel& sys, const char* what) {
  if (sys.nx() > 0 && !(spectral_abscissa(sys.A()) < 0.0)) {
    throw StabilityError(std::string(what) + ": system is not stable");
  }
}

}  // namespace

StateSpaceModel::StateSpaceModel(Matrix a, Matrix b, Matrix c, Matrix d,
                                 std::vector<ChannelGroup> input_groups,
                                 std::vector<ChannelGroup> output_groups)
    : a_(std::move(a)), b_(std::move(b)), c_(std::move(c)), d_(std::move(d)),
      in_groups_(std::move(input_groups)), out_groups_(std::move(output_groups)) {
  const Eigen::Index n = a_.rows();
  if (a_.cols() != n || b_.rows() != n || c_.cols() != n || d_.rows() != c_.rows() || d_.cols() != b_.cols()) {
    throw ShapeError("state-space dimensions are inconsistent");
  }
  if (!a_.allFinite() || !b_.allFinite() || !c_.allFinite() || !d_.allFinite()) {
    throw ShapeError("state-space matrices contain non-finite entries");
  }
  if (in_groups_.empty()) in_groups_ = DefaultGroups("in", nu());
  if (out_groups_.empty()) out_groups_ = DefaultGroups("out", ny());
  CheckGroups(in_groups_, nu(), "input");
  CheckGroups(out_groups_, ny(), "output");
}

StateSpaceModel StateSpaceModel::Gain(const Matrix& d) {
  return StateSpaceModel(Matrix(0, 0), Matrix(0, d.cols()), Matrix(d.rows(), 0), d);
}

bool StateSpaceModel::has_input_group(std::string_view name) const { return FindGroup(in_groups_, name) != nullptr; }
bool StateSpaceModel::has_output_group(std::string_view name) const { return FindGroup(out_groups_, name) != nullptr; }

const ChannelGroup& StateSpaceModel::input_group(std::string_view name) const {
  if (const auto* g = FindGroup(in_groups_, name)) return *g;
  throw ShapeError("no input group named '" + std::string(name) + "'");
}

const ChannelGroup& StateSpaceModel::output_group(std::string_view name) const {
  if (const auto* g = FindGroup(out_groups_, name)) return *g;
  throw ShapeError("no output group named '" + std::string(name) + "'");
}

std::vector<Eigen::Index> StateSpaceModel::input_indices(const std::vector<std::string>& names) const {
  std::vector<Eigen::Index> idx;
  for (const auto& name : names) {
    const auto r = Range(input_group(name));
    idx.insert(idx.end(), r.begin(), r.end());
  }
  return idx;
}

std::vector<Eigen::Index> StateSpaceModel::output_indices(const std::vector<std::string>& names) const {
  std::vector<Eigen::Index> idx;
  for (const auto& name : names) {
    const auto r = Range(output_group(name));
    idx.insert(idx.end(), r.begin(), r.end());
  }
  return idx;
}

StateSpaceModel StateSpaceModel::subsystem(const std::vector<std::string>& inputs,
                                           const std::vector<std::string>& outputs) const {
  const auto in_idx = input_indices(inputs);
  const auto out_idx = output_indices(outputs);
  std::vector<ChannelGroup> in_groups, out_groups;
  Eigen::Index next = 0;
  for (const auto& name : inputs) {
    const auto& g = input_group(name);
    in_groups.push_back({g.name, next, g.size});
    next += g.size;
  }
  next = 0;
  for (const auto& name : outputs) {
    const auto& g = output_group(name);
    out_groups.push_back({g.name, next, g.size});
    next += g.size;
  }
  return StateSpaceModel(a_, Cols(b_, in_idx), Rows(c_, out_idx), Block(d_, out_idx, in_idx),
                         std::move(in_groups), std::move(out_groups));
}

bool operator==(const StateSpaceModel& lhs, const StateSpaceModel& rhs) {
  auto same = [](const Matrix& x, const Matrix& y) {
    return x.rows() == y.rows() && x.cols() == y.cols() && x == y;
  };
  return same(lhs.a_, rhs.a_) && same(lhs.b_, rhs.b_) && same(lhs.c_, rhs.c_) && same(lhs.d_, rhs.d_) &&
         lhs.in_groups_ == rhs.in_groups_ && lhs.out_groups_ == rhs.out_groups_;
}

ComplexMatrix eval_freq(const StateSpaceModel& sys, double omega) {
  if (!std::isfinite(omega) || omega < 0.0) throw DomainError("frequency must be finite and non-negative");
  ComplexMatrix g = sys.D().cast<std::complex<double>>();
  if (sys.nx() == 0) return g;
  ComplexMatrix m = -sys.A().cast<std::complex<double>>();
  m.diagonal().array() += std::complex<double>(0.0, omega);
  Eigen::PartialPivLU<ComplexMatrix> lu(m);
  if (!(lu.rcond() >= kResonanceRcond)) throw ResonanceError(omega);
  g += sys.C().cast<std::complex<double>>() * lu.solve(sys.B().cast<std::complex<double>>());
  return g;
}

double sigma_max_at(const StateSpaceModel& sys, double omega) { return SigmaMax(eval_freq(sys, omega)); }

double spectral_abscissa(const Matrix& a) {
  if (a.rows() != a.cols()) throw ShapeError("spectral abscissa of a non-square matrix");
  if (a.size() == 0) return -std::numeric_limits<double>::infinity();
  if (!a.allFinite()) throw NumericalError("spectral abscissa of a non-finite matrix");
  Eigen::EigenSolver<Matrix> es(a, false);
  if (es.info() != Eigen::Success) throw NumericalError("eigenvalue iteration did not converge");
  return es.eigenvalues().real().maxCoeff();
}

Matrix lyapunov_solve(const Matrix& a, const Matrix& q) {
  const Eigen::Index n = a.rows();
  if (a.cols() != n || q.rows() != n || q.cols() != n) throw ShapeError("lyapunov_solve: dimension mismatch");
  if (n == 0) return Matrix(0, 0);
  if (n > kMaxLyapunovOrder) throw ShapeError("lyapunov_solve: order exceeds the dense Kronecker limit");
  if (!(spectral_abscissa(a) < 0.0)) throw StabilityError("lyapunov_solve: A is not Hurwitz");

  // vec(A^T X + X A) = (I kron A^T + A^T kron I) vec(X), column-major vec.
  const Matrix at = a.transpose();
  Matrix k = Matrix::Zero(n * n, n * n);
  for (Eigen::Index j = 0; j < n; ++j) {
    k.block(j * n, j * n, n, n) += at;
    for (Eigen::Index i = 0; i < n; ++i) {
      k.block(j * n, i * n, n, n).diagonal().array() += at(j, i);
    }
  }
  Eigen::PartialPivLU<Matrix> lu(k);
  if (!(lu.rcond() > 1e-14)) throw NumericalError("lyapunov_solve: singular Kronecker system");
  const Vector rhs = -Eigen::Map<const Vector>(q.data(), n * n);
  const Vector x = lu.solve(rhs);
  Matrix out = Eigen::Map<const Matrix>(x.data(), n, n);
  return 0.5 * (out + out.transpose());
}

double hinf_norm(const StateSpaceModel& sys, double rel_tol) {
  if (!(rel_tol > 0.0)) throw DomainError("hinf_norm: rel_tol must be positive");
  const double d_norm = SigmaMax(sys.D());
  if (sys.nx() == 0) return d_norm;
  CheckStable(sys, "hinf_norm");

  // Lower bound from probes at DC and at the modal frequencies of A.
  double lower = std::max(d_norm, sigma_max_at(sys, 0.0));
  {
    Eigen::EigenSolver<Matrix> es(sys.A(), false);
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
      const auto lambda = es.eigenvalues()(i);
      lower = std::max(lower, sigma_max_at(sys, std::abs(lambda.imag())));
      lower = std::max(lower, sigma_max_at(sys, std::abs(lambda)));
    }
  }
  if (lower <= std::numeric_limits<double>::min()) {
    if (sys.B().cwiseAbs().maxCoeff() == 0.0 || sys.C().cwiseAbs().maxCoeff() == 0.0) return d_norm;
    lower = std::numeric_limits<double>::epsilon();
  }
  lower = std::max(lower, d_norm * (1.0 + std::numeric_limits<double>::epsilon()));

  double upper = std::numeric_limits<double>::infinity();
  bool bound_computed = false;
  bool try_close = true;
  for (int iter = 0; iter < 300; ++iter) {
    if (upper <= lower * (1.0 + 2.0 * rel_tol)) return 0.5 * (lower + upper);
    double gamma;
    if (try_close) {
      gamma = lower * (1.0 + 2.0 * rel_tol);
    } else {
      if (!bound_computed) {
        bound_computed = true;
        upper = std::min(upper, std::max(GramianUpperBound(sys), lower * (1.0 + 4.0 * rel_tol)));
        // Validate by doubling until no crossing remains.
        while (!ImaginaryAxisCrossings(sys, upper).empty()) {
          bool verified = false;
          for (double w : ImaginaryAxisCrossings(sys, upper)) {
            const double s = sigma_max_at(sys, w);
            lower = std::max(lower, s);
            verified = verified || s >= upper * (1.0 - 1e-4);
          }
          if (!verified) break;
          upper *= 2.0;
        }
        continue;
      }
      gamma = std::sqrt(lower * upper);
    }
    const auto crossings = ImaginaryAxisCrossings(sys, gamma);
    double best = 0.0;
    for (std::size_t i = 0; i < crossings.size(); ++i) {
      best = std::max(best, sigma_max_at(sys, crossings[i]));
      if (i + 1 < crossings.size()) best = std::max(best, sigma_max_at(sys, 0.5 * (crossings[i] + crossings[i + 1])));
    }
    if (crossings.empty() || best < gamma * (1.0 - 1e-4)) {
      upper = gamma;
      lower = std::max(lower, best);
      try_close = false;
    } else {
      // Verified crossings: sigma_max reaches gamma somewhere on the axis.
      const double previous = lower;
      lower = std::max({lower, best, gamma});
      // Quadratic-rate update stalled: fall back to bisection.
      try_close = lower > previous * (1.0 + rel_tol);
    }
  }
  throw NumericalError("hinf_norm: bisection did not converge");
}

Matrix controllability_gramian(const StateSpaceModel& sys) {
  CheckStable(sys, "controllability_gramian");
  return lyapunov_solve(sys.A().transpose(), sys.B() * sys.B().transpose());
}

double h2_norm(const StateSpaceModel& sys) {
  CheckStable(sys, "h2_norm");
  CheckFeedthroughZero(sys);
  if (sys.nx() == 0) return 0.0;
  const Matrix wc = controllability_gramian(sys);
  return std::sqrt(std::max((sys.C() * wc * sys.C().transpose()).trace(), 0.0));
}

double gen_h2_norm(const StateSpaceModel& sys) {
  CheckStable(sys, "gen_h2_norm");
  CheckFeedthroughZero(sys);
  if (sys.nx() == 0 || sys.ny() == 0) return 0.0;
  const Matrix wc = controllability_gramian(sys);
  const Matrix m = sys.C() * wc * sys.C().transpose();
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.transpose()), Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(es.eigenvalues().maxCoeff(), 0.0));
}

StateSpaceModel redheffer_star(const Matrix& delta, const StateSpaceModel& g, std::string_view channel) {
  const ChannelGroup& in = g.input_group(channel);
  const ChannelGroup& out = g.output_group(channel);
  if (delta.rows() != in.size || delta.cols() != out.size) {
    throw ShapeError("redheffer_star: delta is " + std::to_string(delta.rows()) + "x" + std::to_string(delta.cols()) +
                     ", loop needs " + std::to_string(in.size) + "x" + std::to_string(out.size));
  }
  const auto din = Range(in), dout = Range(out);
  const auto rin = IndicesExcept(g.nu(), in), rout = IndicesExcept(g.ny(), out);

  const Matrix bd = Cols(g.B(), din), br = Cols(g.B(), rin);
  const Matrix cd = Rows(g.C(), dout), cr = Rows(g.C(), rout);
  const Matrix ddd = Block(g.D(), dout, din), ddr = Block(g.D(), dout, rin);
  const Matrix drd = Block(g.D(), rout, din), drr = Block(g.D(), rout, rin);

  Matrix loop = Matrix::Identity(out.size, out.size) - ddd * delta;
  const Matrix q = delta * InvertChecked(loop, "I - D_dd * Delta");

  return StateSpaceModel(g.A() + bd * q * cd, br + bd * q * ddr, cr + drd * q * cd, drr + drd * q * ddr,
                         DropGroup(g.input_groups(), channel), DropGroup(g.output_groups(), channel));
}

StateSpaceModel redheffer_star(const StateSpaceModel& p, const StateSpaceModel& k, std::string_view control,
                               std::string_view measurement) {
  const ChannelGroup& ug = p.input_group(control);
  const ChannelGroup& yg = p.output_group(measurement);
  if (k.nu() != yg.size || k.ny() != ug.size) {
    throw ShapeError("redheffer_star: controller is " + std::to_string(k.ny()) + "x" + std::to_string(k.nu()) +
                     ", plant loop needs " + std::to_string(ug.size) + "x" + std::to_string(yg.size));
  }
  const auto ui = Range(ug), yi = Range(yg);
  const auto wi = IndicesExcept(p.nu(), ug), zi = IndicesExcept(p.ny(), yg);

  const Matrix bw = Cols(p.B(), wi), bu = Cols(p.B(), ui);
  const Matrix cz = Rows(p.C(), zi), cy = Rows(p.C(), yi);
  const Matrix dzw = Block(p.D(), zi, wi), dzu = Block(p.D(), zi, ui);
  const Matrix dyw = Block(p.D(), yi, wi), dyu = Block(p.D(), yi, ui);

  const Eigen::Index nx = p.nx(), nk = k.nx();
  Matrix e;
  if (k.D().cwiseAbs().maxCoeff() == 0.0 || dyu.size() == 0 || dyu.cwiseAbs().maxCoeff() == 0.0) {
    e = Matrix::Identity(yg.size, yg.size);
  } else {
    e = InvertChecked(Matrix::Identity(yg.size, yg.size) - dyu * k.D(), "I - D_yu * D_k");
  }
  // y = Yx x + Yk xk + Yw w,  u = Ux x + Uk xk + Uw w.
  const Matrix yx = e * cy, yk = e * dyu * k.C(), yw = e * dyw;
  const Matrix ux = k.D() * yx, uk = k.C() + k.D() * yk, uw = k.D() * yw;

  Matrix a(nx + nk, nx + nk);
  a.topLeftCorner(nx, nx) = p.A() + bu * ux;
  a.topRightCorner(nx, nk) = bu * uk;
  a.bottomLeftCorner(nk, nx) = k.B() * yx;
  a.bottomRightCorner(nk, nk) = k.A() + k.B() * yk;
  Matrix b(nx + nk, static_cast<Eigen::Index>(wi.size()));
  b.topRows(nx) = bw + bu * uw;
  b.bottomRows(nk) = k.B() * yw;
  Matrix c(static_cast<Eigen::Index>(zi.size()), nx + nk);
  c.leftCols(nx) = cz + dzu * ux;
  c.rightCols(nk) = dzu * uk;
  Matrix d = dzw + dzu * uw;

  return StateSpaceModel(std::move(a), std::move(b), std::move(c), std::move(d), DropGroup(p.input_groups(), control),
                         DropGroup(p.output_groups(), measurement));
}

StateSpaceModel first_order(double b1, double b0, double a0) {
  // (b1 s + b0)/(s + a0) = b1 + (b0 - b1 a0)/(s + a0)
  Matrix a(1, 1), b(1, 1), c(1, 1), d(1, 1);
  a << -a0;
  b << 1.0;
  c << b0 - b1 * a0;
  d << b1;
  return StateSpaceModel(a, b, c, d);
}

nlohmann::json matrix_to_json(const Matrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const nlohmann::json& j, Eigen::Index rows, Eigen::Index cols) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != rows) throw ConfigError("matrix has wrong row count");
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) throw ConfigError("matrix has ragged rows");
    for (Eigen::Index k = 0; k < cols; ++k) m(i, k) = row[static_cast<std::size_t>(k)].get<double>();
  }
  return m;
}

namespace {

nlohmann::json GroupsToJson(const std::vector<ChannelGroup>& groups) {
  nlohmann::json obj = nlohmann::json::object();
  for (const auto& g : groups) obj[g.name] = {g.start, g.size};
  return obj;
}

std::vector<ChannelGroup> GroupsFromJson(const nlohmann::json& j) {
  std::vector<ChannelGroup> groups;
  for (auto it = j.begin(); it != j.end(); ++it) {
    groups.push_back({it.key(), it.value().at(0).get<Eigen::Index>(), it.value().at(1).get<Eigen::Index>()});
  }
  std::sort(groups.begin(), groups.end(), [](const auto& a, const auto& b) { return a.start < b.start; });
  return groups;
}

Eigen::Index RowCount(const nlohmann::json& m) { return static_cast<Eigen::Index>(m.size()); }
Eigen::Index ColCount(const nlohmann::json& m) {
  return m.empty() ? 0 : static_cast<Eigen::Index>(m.at(0).size());
}

}  // namespace

void to_json(nlohmann::json& j, const StateSpaceModel& sys) {
  j = nlohmann::json{{"A", matrix_to_json(sys.A())},
                     {"B", matrix_to_json(sys.B())},
                     {"C", matrix_to_json(sys.C())},
                     {"D", matrix_to_json(sys.D())},
                     {"nx", sys.nx()},
                     {"nu", sys.nu()},
                     {"ny", sys.ny()},
                     {"input_groups", GroupsToJson(sys.input_groups())},
                     {"output_groups", GroupsToJson(sys.output_groups())}};
}

void from_json(const nlohmann::json& j, StateSpaceModel& sys) {
  try {
    const auto& ja = j.at("A");
    const auto& jb = j.at("B");
    const auto& jc = j.at("C");
    const auto& jd = j.at("D");
    const Eigen::Index nx = j.contains("nx") ? j["nx"].get<Eigen::Index>() : RowCount(ja);
    const Eigen::Index nu = j.contains("nu") ? j["nu"].get<Eigen::Index>() : std::max(ColCount(jb), ColCount(jd));
    const Eigen::Index ny = j.contains("ny") ? j["ny"].get<Eigen::Index>() : std::max(RowCount(jc), RowCount(jd));
    std::vector<ChannelGroup> in, out;
    if (j.contains("input_groups")) in = GroupsFromJson(j["input_groups"]);
    if (j.contains("output_groups")) out = GroupsFromJson(j["output_groups"]);
    sys = StateSpaceModel(matrix_from_json(ja, nx, nx), matrix_from_json(jb, nx, nu), matrix_from_json(jc, ny, nx),
                          matrix_from_json(jd, ny, nu), std::move(in), std::move(out));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("state-space JSON: ") + e.what());
  }
}

}  // namespace gridbo
