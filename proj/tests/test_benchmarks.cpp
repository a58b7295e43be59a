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

#include <cmath>
#include <complex>

#include "doctest.h"
#include "gridbo/benchmarks.hpp"
#include "gridbo/errors.hpp"
#include "test_support.hpp"

using namespace gridbo;
using cd = std::complex<double>;

TEST_CASE("disk weight DC gains") {
  const auto w = unbalanced_disk_weights();
  CHECK(eval_freq(w.wr, 0.0)(0, 0).real() == doctest::Approx(2.282 / 0.7216).epsilon(1e-12));
  CHECK(eval_freq(w.wr, 0.0)(0, 0).real() == doctest::Approx(3.1624).epsilon(1e-4));
  CHECK(eval_freq(w.wz1, 0.0)(0, 0).real() == doctest::Approx(8.3818 / 0.8382).epsilon(1e-12));
  CHECK(w.wz2.D()(0, 0) == 10.0);
}

TEST_CASE("disk generalized plant channel widths") {
  const auto gp = unbalanced_disk_genplant();
  for (const char* name : {"w_r", "w_di", "u"}) CHECK(gp.g().input_group(name).size == 1);
  for (const char* name : {"z1", "z2", "y"}) CHECK(gp.g().output_group(name).size == 1);
  CHECK(gp.g().input_group("delta").size == 3);
  CHECK(gp.g().output_group("delta").size == 2);
  CHECK(gp.g().nx() == 6);
}

TEST_CASE("disk generalized plant matches a transfer-function composition") {
  const DiskParameters p;
  const auto gp = unbalanced_disk_genplant(p);
  auto tf = [](double b1, double b0, double a0, cd s) { return (b1 * s + b0) / (s + a0); };
  Rng rng(17);
  std::uniform_real_distribution<double> unit(-1.0, 1.0), freq(0.01, 50.0);
  for (int trial = 0; trial < 10; ++trial) {
    const GridPoint pt{unit(rng), unit(rng)};
    const auto local = evaluate_local(gp, pt);
    const double mass = p.mass + p.w_mass * pt[0], slope = p.p_nominal + p.w_p * pt[1];
    for (int k = 0; k < 10; ++k) {
      const cd s(0.0, freq(rng));
      const cd g = p.c3() / (s * s + p.c2() * s + p.c1() * mass * slope);
      const cd wz1 = tf(0.5012, 8.3818, 0.8382, s), wz2 = tf(10.0, 34.8219, 1101.2, s);
      const cd wr = tf(0.0, 2.282, 0.7216, s), wdi = tf(0.0, 0.0144, 0.1443, s);
      Eigen::Matrix3cd expected;
      expected << wz1 * wr, -wz1 * g * wdi, -wz1 * g, 0.0, 0.0, wz2, wr, -g * wdi, -g;
      const ComplexMatrix got = eval_freq(local, s.imag());
      CHECK((got - expected).norm() <= 1e-9 * expected.norm());
    }
  }
}

TEST_CASE("arm scheduling map at the origin") {
  const ArmParameters p;
  const Vector s = arm_scheduling_map(Vector::Zero(4), p);
  const double h = p.a * p.c - p.b * p.b;
  CHECK(h == doctest::Approx(8.0447).epsilon(1e-4));
  CHECK(s(0) == doctest::Approx(0.12430).epsilon(1e-4));
  CHECK(s(4) == doctest::Approx(-0.8133).epsilon(1e-4));
  CHECK(s(2) == doctest::Approx(1.0 / h).epsilon(1e-14));
  const auto arm = robot_arm_models();
  CHECK(arm.model.f(0.0, Vector::Zero(4), Vector::Zero(2)).norm() == 0.0);
}

TEST_CASE("LPV embedding reproduces the nonlinear arm exactly") {
  const auto arm = robot_arm_models();
  Rng rng(21);
  std::uniform_real_distribution<double> q(-3.0, 3.0), v(-4.0, 4.0), tau(-5.0, 5.0);
  for (int k = 0; k < 100; ++k) {
    Vector x(4), u(2);
    x << q(rng), q(rng), v(rng), v(rng);
    u << tau(rng), tau(rng);
    const Vector s = arm.scheduling_map(x);
    const Vector lpv = arm_a(s) * x + arm_b(s) * u;
    const Vector nl = arm.model.f(0.0, x, u);
    CHECK((lpv - nl).norm() <= 1e-12 * (1.0 + nl.norm()));
  }
}

TEST_CASE("arm mass matrix stays positive definite") {
  const ArmParameters p;
  Rng rng(2);
  std::uniform_real_distribution<double> q(-M_PI, M_PI);
  for (int k = 0; k < 100; ++k) {
    const double c = std::cos(q(rng) - q(rng));
    Eigen::Matrix2d m;
    m << p.a, p.b * c, p.b * c, p.c;
    CHECK(m.determinant() > 0.0);
    CHECK(m.determinant() == doctest::Approx(p.a * p.c - p.b * p.b * c * c));
    CHECK(Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(m).eigenvalues().minCoeff() > 0.0);
  }
}

TEST_CASE("arm generalized plant realizes A(p) and the actuator-weighted B(p)") {
  const auto arm = robot_arm_models();
  const Box box = arm.genplant.domain();
  for (const auto& pt : sample_domain(arm.genplant.structure(), 10, 31)) {
    const auto local = evaluate_local(arm.genplant, pt);
    CHECK((local.A().topLeftCorner(4, 4) - arm_a(pt.theta)).norm() < 1e-12);
    CHECK((local.A().block(0, 6, 4, 2) - 1e3 * arm_b(pt.theta)).norm() < 1e-9);
    const auto d_in = local.input_group("d");
    CHECK((local.B().block(0, d_in.start, 4, 2) - arm_b(pt.theta)).norm() < 1e-12);
  }
  CHECK(box.contains(arm.scheduling_map(Vector::Zero(4))));
}

TEST_CASE("scheduling box covers the training reference") {
  const auto ref = builtin_reference("arm_ref1_v1");
  const Box box = arm_scheduling_box(ref);
  for (int k = 0; k <= 500; ++k) {
    const double t = ref.end_time() * k / 500.0;
    Vector x(4);
    x << ref.value(t), ref.rate(t);
    CHECK(box.contains(arm_scheduling_map(x)));
  }
  CHECK(((box.hi - box.lo).array() > 0.0).all());
}

TEST_CASE("reference rate matches a central difference") {
  for (const auto& name : builtin_reference_names()) {
    const auto ref = builtin_reference(name);
    for (double t = 0.05; t < ref.end_time(); t += 0.37) {
      const Vector fd = (ref.value(t + 1e-6) - ref.value(t - 1e-6)) / 2e-6;
      CHECK((fd - ref.rate(t)).norm() < 1e-5);
    }
    CHECK(ref.value(0.0).isZero());
  }
  CHECK_THROWS_AS(builtin_reference("nope"), ConfigError);
}
