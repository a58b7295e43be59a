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

#include <algorithm>
#include <cmath>
#include <sstream>

#include <unsupported/Eigen/MatrixFunctions>

#include "doctest.h"
#include "gridbo/errors.hpp"
#include "gridbo/sim.hpp"

using namespace gridbo;

namespace {

OdeRhs Decay() {
  return [](double, const Vector& x) { return Vector(-x); };
}

// x' = -x + u, y = x.
NonlinearModel FirstOrder() {
  NonlinearModel m;
  m.name = "lag";
  m.nx = m.nu = m.ny = 1;
  m.f = [](double, const Vector& x, const Vector& u) { return Vector(-x + u); };
  m.h = [](const Vector& x) { return x; };
  return m;
}

// PI law: xk' = e, u = 2 xk + 1.5 e.
ControllerParam Pi() {
  return ControllerParam::from_matrices({1, 1, 1, false}, Matrix::Zero(1, 1), Matrix::Ones(1, 1),
                                        Matrix::Constant(1, 1, 2.0), Matrix::Constant(1, 1, 1.5));
}

Reference Constant(double v) {
  Matrix vals(2, 1);
  vals << v, v;
  return Reference("constant", {0.0, 1.0}, vals);
}

SimScenario LagScenario() {
  SimScenario sc;
  sc.model = FirstOrder();
  sc.controller = Pi();
  sc.reference = Constant(1.0);
  sc.t_end = 5.0;
  sc.ode.rel_tol = 1e-10;
  sc.ode.abs_tol = 1e-12;
  sc.ode.output_dt = 0.05;
  return sc;
}

}  // namespace

TEST_CASE("ode_rk45 on x' = -x reaches exp(-1)") {
  OdeOptions o;
  o.rel_tol = 1e-8;
  o.abs_tol = 1e-12;
  const auto sol = ode_rk45(Decay(), Vector::Ones(1), 0.0, 1.0, o);
  CHECK_FALSE(sol.diverged);
  CHECK(sol.t.back() == 1.0);
  CHECK(std::abs(sol.x.back()(0) - std::exp(-1.0)) < 1e-6);
  CHECK(sol.t.size() == sol.x.size());
  CHECK(sol.steps > 0);
}

TEST_CASE("ode_rk45 keeps a constant trajectory and honours output times") {
  OdeOptions o;
  o.output_dt = 0.25;
  const Vector x0 = (Vector(3) << 1.0, -2.0, 0.5).finished();
  const auto sol = ode_rk45([](double, const Vector& x) { return Vector::Zero(x.size()).eval(); }, x0, 1.0, 3.0, o);
  REQUIRE(sol.t.size() == 9);
  for (std::size_t i = 0; i < sol.t.size(); ++i) {
    CHECK(sol.t[i] == doctest::Approx(1.0 + 0.25 * static_cast<double>(i)));
    CHECK(sol.x[i] == x0);
  }
  CHECK(sol.t.back() == 3.0);

  // Many capped steps per output interval must land on every output time.
  o.max_step = 1e-3;
  o.output_dt = 0.01;
  const auto long_run = ode_rk45(Decay(), Vector::Ones(1), 0.0, 12.0, o);
  CHECK_FALSE(long_run.diverged);
  CHECK(long_run.t.size() == 1201);
  CHECK(long_run.t.back() == 12.0);
}

TEST_CASE("ode_rk45 conserves oscillator energy over ten periods") {
  OdeOptions o;
  o.rel_tol = 1e-9;
  o.abs_tol = 1e-12;
  const auto f = [](double, const Vector& x) { return (Vector(2) << x(1), -x(0)).finished(); };
  const auto sol = ode_rk45(f, (Vector(2) << 1.0, 0.0).finished(), 0.0, 20.0 * M_PI, o);
  double drift = 0.0;
  for (const auto& x : sol.x) drift = std::max(drift, std::abs(x.squaredNorm() - 1.0));
  CHECK(drift < 1e-6);
}

TEST_CASE("ode_rk45 fixed-step error shrinks at high order") {
  auto error_at = [](double h) {
    OdeOptions o;
    o.rel_tol = 1.0;
    o.abs_tol = 1.0;
    o.initial_step = h;
    o.max_step = h;
    const auto sol = ode_rk45(Decay(), Vector::Ones(1), 0.0, 2.0, o);
    CHECK(sol.rejected == 0);
    return std::abs(sol.x.back()(0) - std::exp(-2.0));
  };
  const double ratio = error_at(0.2) / error_at(0.1);
  CHECK(ratio > 8.0);
  CHECK(ratio < 64.0);
}

TEST_CASE("ode_rk45 flags blow-up and truncates") {
  OdeOptions o;
  o.divergence_norm = 1e6;
  const auto sol = ode_rk45([](double, const Vector& x) { return Vector(x.array().square()); }, Vector::Ones(1), 0.0,
                            2.0, o);
  CHECK(sol.diverged);
  CHECK(sol.t.back() < 1.0);  // finite escape time 1
  CHECK(sol.x.back().norm() <= 1e6);
  CHECK_THROWS_AS(ode_rk45(Decay(), Vector::Ones(1), 1.0, 0.0), DomainError);
  o.rel_tol = 0.0;
  CHECK_THROWS_AS(ode_rk45(Decay(), Vector::Ones(1), 0.0, 1.0, o), ConfigError);
}

TEST_CASE("closed loop matches the linear solution") {
  const SimScenario sc = LagScenario();
  const SimResult res = simulate_closed_loop(sc);
  REQUIRE_FALSE(res.diverged);
  // z = (x, xk): z' = A z + b for r = 1.
  Matrix a(2, 2);
  a << -1.0 - 1.5, 2.0, -1.0, 0.0;
  const Vector b = (Vector(2) << 1.5, 1.0).finished();
  for (std::size_t i = 0; i < res.t.size(); i += 10) {
    const Matrix e = (a * res.t[i]).exp();
    const Vector z = a.fullPivLu().solve((e - Matrix::Identity(2, 2)) * b);
    CHECK(std::abs(res.x[i](0) - z(0)) < 1e-7);
    CHECK(std::abs(res.u[i](0) - (2.0 * z(1) + 1.5 * (1.0 - z(0)))) < 1e-7);
  }
  CHECK(res.t.size() == 101);
  CHECK(res.rmse.size() == 1);
  double acc = 0.0;
  for (std::size_t i = 0; i < res.t.size(); ++i) acc += std::pow(res.r[i](0) - res.y[i](0), 2);
  CHECK(res.rmse(0) == doctest::Approx(std::sqrt(acc / 101.0)));
  // The integrator removes the steady-state error.
  CHECK(std::abs(res.y.back()(0) - 1.0) < 1e-2);
}

TEST_CASE("zero reference and no disturbance stays at rest") {
  SimScenario sc = LagScenario();
  sc.reference = Constant(0.0);
  const SimResult res = simulate_closed_loop(sc);
  CHECK(res.rmse(0) == 0.0);
  CHECK(res.x.back().norm() == 0.0);
}

TEST_CASE("a scheduled controller evaluated at its node matches the fixed one") {
  SimScenario fixed = LagScenario();
  SimScenario sched = fixed;
  const std::vector<GridPoint> nodes{GridPoint{0.0}, GridPoint{1.0}};
  const Box box{Vector::Zero(1), Vector::Ones(1)};
  const auto field = fit_field({Pi(), Pi()}, nodes, box);
  sched.controller = ScheduledController{field, [](const Vector&) { return Vector::Zero(1).eval(); }};
  const SimResult a = simulate_closed_loop(fixed), b = simulate_closed_loop(sched);
  REQUIRE(a.t.size() == b.t.size());
  for (std::size_t i = 0; i < a.t.size(); ++i) CHECK(std::abs(a.x[i](0) - b.x[i](0)) < 1e-9);
}

TEST_CASE("destabilizing feedback diverges with infinite RMSE") {
  SimScenario sc = LagScenario();
  sc.controller = ControllerParam::from_matrices({0, 1, 1, false}, Matrix(0, 0), Matrix(0, 1), Matrix(1, 0),
                                                 Matrix::Constant(1, 1, -5.0));
  sc.t_end = 50.0;
  const SimResult res = simulate_closed_loop(sc);
  CHECK(res.diverged);
  CHECK(std::isinf(res.rmse(0)));
  CHECK(res.t.back() < 50.0);
  CHECK(res.t.size() == res.y.size());

  // Positive feedback on the arm.
  const auto arm = robot_arm_models();
  SimScenario a;
  a.model = arm.model;
  a.controller = ControllerParam::from_matrices({0, 2, 2, false}, Matrix(0, 0), Matrix(0, 2), Matrix(2, 0),
                                                -200.0 * Matrix::Identity(2, 2));
  a.reference = builtin_reference("arm_ref1_v1");
  a.t_end = a.reference.end_time();
  a.ode.max_step = 1e-3;
  // The loop goes chaotic rather than escaping in finite time, so the step
  // budget is what ends it.
  a.ode.max_steps = 200'000;
  const SimResult ra = simulate_closed_loop(a);
  CHECK(ra.diverged);
  CHECK(std::isinf(ra.rmse(0)));
}

TEST_CASE("filtered input noise is seeded and reproducible") {
  SimScenario sc;
  sc.model = unbalanced_disk_model(DiskParameters{}.mass);
  sc.controller = ControllerParam::from_matrices({0, 1, 1, false}, Matrix(0, 0), Matrix(0, 1), Matrix(1, 0),
                                                 Matrix::Constant(1, 1, 0.5));
  sc.reference = Constant(0.0);
  sc.t_end = 1.0;
  sc.ode.output_dt = 0.01;
  sc.disturbance.psd = 0.7;
  sc.disturbance.sample_time = 0.01;
  sc.disturbance.filter = unbalanced_disk_weights().wdi;
  sc.disturbance.seed = 3;
  const SimResult a = simulate_closed_loop(sc);
  const SimResult b = simulate_closed_loop(sc);
  sc.disturbance.seed = 4;
  const SimResult c = simulate_closed_loop(sc);
  CHECK_FALSE(a.diverged);
  CHECK(a.t.size() == 101);
  CHECK(a.y == b.y);
  CHECK_FALSE(a.y == c.y);
  CHECK(a.rmse(0) > 0.0);

  const auto batch = simulate_batch({sc, sc}, Execution::kParallel);
  CHECK(batch[0].y == c.y);
  CHECK(batch[1].y == c.y);
}

TEST_CASE("simulation rejects mismatched dimensions and writes CSV") {
  SimScenario sc = LagScenario();
  sc.controller = ControllerParam::zero({0, 2, 1, false});
  CHECK_THROWS_AS(simulate_closed_loop(sc), ShapeError);
  sc = LagScenario();
  sc.reference = builtin_reference("arm_ref1_v1");
  CHECK_THROWS_AS(simulate_closed_loop(sc), ShapeError);

  sc = LagScenario();
  sc.t_end = 0.1;
  std::ostringstream os;
  write_sim_csv(os, simulate_closed_loop(sc));
  const std::string text = os.str();
  CHECK(text.rfind("t,x_1,u_1,y_1,r_1\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 4);
}
