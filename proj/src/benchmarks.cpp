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

#include "gridbo/benchmarks.hpp"

#include <algorithm>
#include <cmath>

#include "gridbo/errors.hpp"

namespace gridbo {
namespace {

double Sinc(double x) { return std::abs(x) < 1e-8 ? 1.0 - x * x / 6.0 : std::sin(x) / x; }

double Smoothstep(double s) { return s * s * s * (10.0 + s * (-15.0 + 6.0 * s)); }
double SmoothstepRate(double s) { return 30.0 * s * s * (1.0 - s) * (1.0 - s); }

Matrix Rows(std::initializer_list<std::initializer_list<double>> rows) {
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.begin()->size()));
  Eigen::Index i = 0;
  for (const auto& r : rows) {
    Eigen::Index j = 0;
    for (double v : r) m(i, j++) = v;
    ++i;
  }
  return m;
}

}  // namespace

Reference::Reference(std::string name, std::vector<double> times, Matrix values)
    : name_(std::move(name)), times_(std::move(times)), values_(std::move(values)) {
  if (times_.empty() || static_cast<Eigen::Index>(times_.size()) != values_.rows()) {
    throw ShapeError("reference needs one value row per waypoint");
  }
  if (!std::is_sorted(times_.begin(), times_.end())) throw DomainError("reference waypoints must be sorted in time");
}

Vector Reference::value(double t) const {
  if (t <= times_.front()) return values_.row(0).transpose();
  if (t >= times_.back()) return values_.row(values_.rows() - 1).transpose();
  const auto k = static_cast<Eigen::Index>(std::upper_bound(times_.begin(), times_.end(), t) - times_.begin()) - 1;
  const double t0 = times_[static_cast<std::size_t>(k)], t1 = times_[static_cast<std::size_t>(k + 1)];
  const double s = t1 > t0 ? Smoothstep((t - t0) / (t1 - t0)) : 1.0;
  return (values_.row(k) + s * (values_.row(k + 1) - values_.row(k))).transpose();
}

Vector Reference::rate(double t) const {
  if (t <= times_.front() || t >= times_.back()) return Vector::Zero(channels());
  const auto k = static_cast<Eigen::Index>(std::upper_bound(times_.begin(), times_.end(), t) - times_.begin()) - 1;
  const double t0 = times_[static_cast<std::size_t>(k)], t1 = times_[static_cast<std::size_t>(k + 1)];
  if (t1 <= t0) return Vector::Zero(channels());
  const double ds = SmoothstepRate((t - t0) / (t1 - t0)) / (t1 - t0);
  return (ds * (values_.row(k + 1) - values_.row(k))).transpose();
}

std::vector<std::string> builtin_reference_names() {
  return {"disk_steps_v1", "arm_ref1_v1", "arm_ref2_v1", "arm_ref3_v1"};
}

Reference builtin_reference(const std::string& name) {
  if (name == "disk_steps_v1") {
    return Reference(name, {0, 1, 2, 6, 7, 11, 12, 16, 17, 20},
                     Rows({{0}, {0}, {1.2}, {1.2}, {-0.6}, {-0.6}, {0.8}, {0.8}, {0}, {0}}));
  }
  if (name == "arm_ref1_v1") {
    return Reference(name, {0, 1, 3, 5, 7, 9, 11, 12},
                     Rows({{0, 0}, {0, 0}, {0.8, -0.6}, {0.8, -0.6}, {-0.4, 0.5}, {-0.4, 0.5}, {0, 0}, {0, 0}}));
  }
  if (name == "arm_ref2_v1") {
    return Reference(name, {0, 1, 2.5, 4.5, 6, 8, 9.5, 11},
                     Rows({{0, 0}, {0, 0}, {1.3, -1.0}, {1.3, -1.0}, {-0.9, 0.9}, {-0.9, 0.9}, {0, 0}, {0, 0}}));
  }
  if (name == "arm_ref3_v1") {
    return Reference(name, {0, 1, 2, 3, 4, 5, 6, 7, 8},
                     Rows({{0, 0}, {0, 0}, {1.0, 0.8}, {-1.0, -0.8}, {1.0, 0.8}, {-1.0, -0.8}, {0, 0}, {0, 0},
                           {0, 0}}));
  }
  throw ConfigError("unknown reference '" + name + "'");
}

// -- Unbalanced disk ---------------------------------------------------------

LfrPlant unbalanced_disk_lfr(const DiskParameters& p) {
  const double c1 = p.c1(), c2 = p.c2(), c3 = p.c3();
  Matrix a = Rows({{0, 1}, {-c1 * p.mass * p.p_nominal, -c2}});
  Matrix b = Rows({{0, 0, 0, 0}, {-c1 * p.w_mass * p.p_nominal, -c1 * p.mass * p.w_p, -c1 * p.w_mass * p.w_p, c3}});
  Matrix c = Rows({{1, 0}, {0, 0}, {1, 0}});
  Matrix d = Rows({{0, 0, 0, 0}, {1, 0, 0, 0}, {0, 0, 0, 0}});
  StateSpaceModel g(a, b, c, d, {{"delta", 0, 3}, {"u", 3, 1}}, {{"delta", 0, 2}, {"y", 2, 1}});
  return LfrPlant(std::move(g),
                  DeltaStructure({{"delta1", 1, -1.0, 1.0}, {"delta2", 2, -1.0, 1.0}}, Rows({{1, 0}, {1, 0}, {0, 1}})),
                  PlantKind::kRobust);
}

DiskWeights unbalanced_disk_weights() {
  return {first_order(0.5012, 8.3818, 0.8382), first_order(10.0, 34.8219, 1101.2), first_order(0.0, 2.282, 0.7216),
          first_order(0.0, 0.0144, 0.1443)};
}

LfrPlant unbalanced_disk_genplant(const DiskParameters& p) {
  const LfrPlant lfr = unbalanced_disk_lfr(p);
  const auto w = unbalanced_disk_weights();
  const auto& g = lfr.g();
  // States: disk (2), W_r, W_di, W_z1, W_z2.
  // Inputs: delta (3), w_r, w_di, u.  Outputs: delta (2), z1, z2, y.
  constexpr Eigen::Index kNx = 6, kNu = 6, kNy = 5;
  constexpr Eigen::Index kR = 2, kDi = 3, kZ1 = 4, kZ2 = 5;
  constexpr Eigen::Index kWr = 3, kWdi = 4, kU = 5;
  Matrix a = Matrix::Zero(kNx, kNx), b = Matrix::Zero(kNx, kNu), c = Matrix::Zero(kNy, kNx), d = Matrix::Zero(kNy, kNu);

  const Matrix& gb = g.B();
  a.topLeftCorner(2, 2) = g.A();
  b.topLeftCorner(2, 3) = gb.leftCols(3);
  b.block(0, kU, 2, 1) = gb.col(3);
  // Plant input is u + W_di(w_di).
  a.block(0, kDi, 2, 1) = gb.col(3) * w.wdi.C()(0, 0);

  a(kR, kR) = w.wr.A()(0, 0);
  b(kR, kWr) = w.wr.B()(0, 0);
  a(kDi, kDi) = w.wdi.A()(0, 0);
  b(kDi, kWdi) = w.wdi.B()(0, 0);

  // e = W_r(w_r) - x1.
  Matrix e_row = Matrix::Zero(1, kNx);
  e_row(0, kR) = w.wr.C()(0, 0);
  e_row(0, 0) = -1.0;

  a(kZ1, kZ1) = w.wz1.A()(0, 0);
  a.row(kZ1) += w.wz1.B()(0, 0) * e_row;
  a(kZ2, kZ2) = w.wz2.A()(0, 0);
  b(kZ2, kU) = w.wz2.B()(0, 0);

  c.topLeftCorner(2, 2) = g.C().topRows(2);
  d.topLeftCorner(2, 3) = g.D().topLeftCorner(2, 3);

  c.row(2) = w.wz1.D()(0, 0) * e_row;
  c(2, kZ1) += w.wz1.C()(0, 0);
  c(3, kZ2) = w.wz2.C()(0, 0);
  d(3, kU) = w.wz2.D()(0, 0);
  c.row(4) = e_row;

  StateSpaceModel gp(a, b, c, d, {{"delta", 0, 3}, {"w_r", 3, 1}, {"w_di", 4, 1}, {"u", 5, 1}},
                     {{"delta", 0, 2}, {"z1", 2, 1}, {"z2", 3, 1}, {"y", 4, 1}});
  return LfrPlant(std::move(gp), lfr.structure(), PlantKind::kRobust);
}

NonlinearModel unbalanced_disk_model(double mass, const DiskParameters& p) {
  NonlinearModel m;
  m.name = "unbalanced_disk";
  m.nx = 2;
  m.nu = 1;
  m.ny = 1;
  const double c1 = p.c1(), c2 = p.c2(), c3 = p.c3();
  m.f = [=](double, const Vector& x, const Vector& u) {
    Vector dx(2);
    dx(0) = x(1);
    dx(1) = -mass * c1 * std::sin(x(0)) - c2 * x(1) + c3 * u(0);
    return dx;
  };
  m.h = [](const Vector& x) { return Vector::Constant(1, x(0)); };
  return m;
}

// -- Robot arm ---------------------------------------------------------------

Vector arm_scheduling_map(const Vector& x, const ArmParameters& p) {
  if (x.size() != 4) throw ShapeError("arm state has 4 components");
  const double cd = std::cos(x(0) - x(1)), sd = std::sin(x(0) - x(1));
  const double h = p.a * p.c - p.b * p.b * cd * cd;
  Vector s(kArmScheduling);
  s(0) = 1.0 / h;
  s(1) = cd / h;
  s(2) = Sinc(x(0)) / h;
  s(3) = cd * Sinc(x(1)) / h;
  s(4) = (-p.b * p.b * sd * cd * x(2) - (p.c + p.b * cd) * p.f) / h;
  s(5) = (-p.c * sd * x(3) + cd * p.f) / h;
  s(6) = cd * Sinc(x(0)) / h;
  s(7) = Sinc(x(1)) / h;
  s(8) = (p.a * p.b * sd * x(2) + p.f * (p.a + p.b * cd)) / h;
  s(9) = (p.b * p.b * sd * cd * x(3) - p.a * p.f) / h;
  return s;
}

Matrix arm_a(const Vector& s, const ArmParameters& p) {
  if (s.size() != kArmScheduling) throw ShapeError("arm scheduling vector has 10 components");
  Matrix a = Matrix::Zero(4, 4);
  a(0, 2) = 1.0;
  a(1, 3) = 1.0;
  a.row(2) << p.c * p.d * s(2), -p.b * p.e * s(3), s(4), p.b * s(5);
  a.row(3) << -p.b * p.d * s(6), p.a * p.e * s(7), s(8), s(9);
  return a;
}

Matrix arm_b(const Vector& s, const ArmParameters& p) {
  if (s.size() != kArmScheduling) throw ShapeError("arm scheduling vector has 10 components");
  Matrix b = Matrix::Zero(4, 2);
  b.row(2) << p.c * p.n * s(0), -p.b * p.n * s(1);
  b.row(3) << -p.b * p.n * s(1), p.a * p.n * s(0);
  return b;
}

Box arm_scheduling_box(const Reference& ref, int samples, double widen, const ArmParameters& p) {
  if (ref.channels() != 2) throw ShapeError("arm reference must have two channels");
  if (samples < 2) throw DomainError("need at least two samples");
  Vector lo = Vector::Constant(kArmScheduling, std::numeric_limits<double>::infinity());
  Vector hi = -lo;
  for (int k = 0; k < samples; ++k) {
    const double t = ref.end_time() * k / (samples - 1);
    Vector x(4);
    x << ref.value(t), ref.rate(t);
    const Vector s = arm_scheduling_map(x, p);
    lo = lo.cwiseMin(s);
    hi = hi.cwiseMax(s);
  }
  const Vector margin =
      (widen * (hi - lo)).array() + 1e-3 * lo.cwiseAbs().cwiseMax(hi.cwiseAbs()).array() + 1e-9;
  return Box{lo - margin, hi + margin};
}

RobotArmModels robot_arm_models(const Box& box, const ArmParameters& p) {
  if (box.dim() != kArmScheduling) throw ShapeError("arm scheduling box has 10 dimensions");
  // Scheduling channels in block order: (p1 x2, p2 x2, p3 .. p10). Each
  // channel reads one source signal and writes one row of the rate equations.
  enum Source { kQ1, kQ2, kV1, kV2, kTau1, kTau2 };
  struct Channel {
    Source source;
    int row;  // 2 or 3
    double coef;
  };
  const std::vector<Channel> channels = {
      {kTau1, 2, p.c * p.n},  {kTau2, 3, p.a * p.n},  {kTau2, 2, -p.b * p.n}, {kTau1, 3, -p.b * p.n},
      {kQ1, 2, p.c * p.d},    {kQ2, 2, -p.b * p.e},   {kV1, 2, 1.0},          {kV2, 2, p.b},
      {kQ1, 3, -p.b * p.d},   {kQ2, 3, p.a * p.e},    {kV1, 3, 1.0},          {kV2, 3, 1.0},
  };
  const auto nd = static_cast<Eigen::Index>(channels.size());

  // W1 = (0.5 s + 5)/(s + 5e-5), W2 = 3e-3, W3 = 1e3/(s + 1e3).
  const StateSpaceModel w1 = first_order(0.5, 5.0, 5e-5);
  const StateSpaceModel w3 = first_order(0.0, 1e3, 1e3);
  constexpr double kW2 = 3e-3;

  // States: q (2), q' (2), W1 (2), W3 (2).
  const Eigen::Index nx = 8, nu = nd + 6, ny = nd + 6;
  const Eigen::Index in_r = nd, in_d = nd + 2, in_u = nd + 4;
  const Eigen::Index out_z1 = nd, out_z2 = nd + 2, out_y = nd + 4;
  Matrix a = Matrix::Zero(nx, nx), b = Matrix::Zero(nx, nu), c = Matrix::Zero(ny, nx), d = Matrix::Zero(ny, nu);
  a(0, 2) = 1.0;
  a(1, 3) = 1.0;
  for (Eigen::Index k = 0; k < nd; ++k) {
    const auto& ch = channels[static_cast<std::size_t>(k)];
    b(ch.row, k) = ch.coef;
    switch (ch.source) {
      case kQ1: c(k, 0) = 1.0; break;
      case kQ2: c(k, 1) = 1.0; break;
      case kV1: c(k, 2) = 1.0; break;
      case kV2: c(k, 3) = 1.0; break;
      case kTau1: c(k, 6) = w3.C()(0, 0); d(k, in_d) = 1.0; break;
      case kTau2: c(k, 7) = w3.C()(0, 0); d(k, in_d + 1) = 1.0; break;
    }
  }
  for (Eigen::Index j = 0; j < 2; ++j) {
    // Actuator weight driven by the controller output.
    a(6 + j, 6 + j) = w3.A()(0, 0);
    b(6 + j, in_u + j) = w3.B()(0, 0);
    // Tracking weight driven by e = r - q.
    a(4 + j, 4 + j) = w1.A()(0, 0);
    a(4 + j, j) = -w1.B()(0, 0);
    b(4 + j, in_r + j) = w1.B()(0, 0);
    c(out_z1 + j, 4 + j) = w1.C()(0, 0);
    c(out_z1 + j, j) = -w1.D()(0, 0);
    d(out_z1 + j, in_r + j) = w1.D()(0, 0);
    d(out_z2 + j, in_u + j) = kW2;
    c(out_y + j, j) = -1.0;
    d(out_y + j, in_r + j) = 1.0;
  }
  StateSpaceModel g(a, b, c, d, {{"delta", 0, nd}, {"r", in_r, 2}, {"d", in_d, 2}, {"u", in_u, 2}},
                    {{"delta", 0, nd}, {"z1", out_z1, 2}, {"z2", out_z2, 2}, {"y", out_y, 2}});

  std::vector<DeltaBlock> blocks;
  for (int i = 0; i < kArmScheduling; ++i) {
    blocks.push_back({"p" + std::to_string(i + 1), i < 2 ? 2 : 1, box.lo(i), box.hi(i)});
  }

  RobotArmModels out;
  out.genplant = LfrPlant(std::move(g), DeltaStructure(std::move(blocks)), PlantKind::kLpv);
  out.scheduling_map = [p](const Vector& x) { return arm_scheduling_map(x, p); };
  out.actuator = StateSpaceModel(w3.A()(0, 0) * Matrix::Identity(2, 2), w3.B()(0, 0) * Matrix::Identity(2, 2),
                                 w3.C()(0, 0) * Matrix::Identity(2, 2), Matrix::Zero(2, 2));
  out.model.name = "robot_arm";
  out.model.nx = 4;
  out.model.nu = 2;
  out.model.ny = 2;
  out.model.f = [p](double, const Vector& x, const Vector& u) {
    const double cd = std::cos(x(0) - x(1)), sd = std::sin(x(0) - x(1));
    Eigen::Matrix2d mass;
    mass << p.a, p.b * cd, p.b * cd, p.c;
    Eigen::Vector2d coriolis(p.b * sd * x(3) * x(3) + p.f * x(2), -p.b * sd * x(2) * x(2) + p.f * (x(3) - x(2)));
    Eigen::Vector2d gravity(-p.d * std::sin(x(0)), -p.e * std::sin(x(1)));
    Eigen::Vector2d torque(p.n * u(0), p.n * u(1));
    const Eigen::Vector2d acc = mass.ldlt().solve(torque - coriolis - gravity);
    Vector dx(4);
    dx << x(2), x(3), acc(0), acc(1);
    return dx;
  };
  out.model.h = [](const Vector& x) { return Vector(x.head(2)); };
  return out;
}

RobotArmModels robot_arm_models() {
  return robot_arm_models(arm_scheduling_box(builtin_reference("arm_ref1_v1")));
}

}  // namespace gridbo
