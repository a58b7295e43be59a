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

#include <nlohmann/json.hpp>

#include "doctest.h"
#include "gridbo/benchmarks.hpp"
#include "gridbo/errors.hpp"
#include "gridbo/lfr.hpp"
#include "test_support.hpp"

using namespace gridbo;

namespace {

DeltaStructure TwoBlocks() { return DeltaStructure({{"d1", 1, -1.0, 1.0}, {"d2", 2, -1.0, 1.0}}); }

}  // namespace

TEST_CASE("delta_matrix builds the repeated diagonal") {
  const Matrix m = delta_matrix(TwoBlocks(), GridPoint{1.0, -1.0});
  CHECK(m == Vector::Map(std::vector<double>{1, -1, -1}.data(), 3).asDiagonal().toDenseMatrix());
  CHECK(delta_matrix(TwoBlocks(), GridPoint{0.0, 0.0}).isZero(0.0));
  const DeltaStructure one({{"p", 3, -1.0, 1.0}});
  CHECK(delta_matrix(one, GridPoint{0.5}) == 0.5 * Matrix::Identity(3, 3));
}

TEST_CASE("delta_matrix spectral norm equals the largest block magnitude") {
  Rng rng(4);
  const DeltaStructure s({{"a", 2, -1, 1}, {"b", 1, -1, 1}, {"c", 3, -1, 1}});
  for (const auto& pt : sample_domain(s, 25, 8)) {
    const double norm = Eigen::JacobiSVD<Matrix>(delta_matrix(s, pt)).singularValues()(0);
    CHECK(norm == doctest::Approx(pt.theta.cwiseAbs().maxCoeff()).epsilon(1e-14));
  }
}

TEST_CASE("out-of-domain values are rejected with the block name") {
  try {
    delta_matrix(TwoBlocks(), GridPoint{0.0, 1.5});
    FAIL("expected DomainError");
  } catch (const DomainError& e) {
    CHECK(std::string(e.what()).find("d2") != std::string::npos);
  }
  CHECK_THROWS_AS(delta_matrix(TwoBlocks(), GridPoint{0.0}), ShapeError);
  CHECK_THROWS_AS(DeltaStructure({{"bad", 0, -1, 1}}), ShapeError);
  CHECK_THROWS_AS(DeltaStructure({{"bad", 1, 1, -1}}), DomainError);
}

TEST_CASE("plant construction checks delta channel widths") {
  Rng rng(1);
  const auto raw = testing::random_stable(rng, 2, 3, 3);
  StateSpaceModel g(raw.A(), raw.B(), raw.C(), raw.D(), {{"delta", 0, 2}, {"u", 2, 1}},
                    {{"delta", 0, 2}, {"y", 2, 1}});
  CHECK_NOTHROW(LfrPlant(g, DeltaStructure({{"a", 2, -1, 1}}), PlantKind::kRobust));
  CHECK_THROWS_AS(LfrPlant(g, DeltaStructure({{"a", 1, -1, 1}}), PlantKind::kRobust), ShapeError);
}

TEST_CASE("evaluate_local on the disk LFR at the nominal point") {
  const DiskParameters p;
  const auto local = evaluate_local(unbalanced_disk_lfr(p), GridPoint{0.0, 0.0});
  CHECK(local.nx() == 2);
  CHECK(local.A()(1, 0) == doctest::Approx(-p.c1() * 0.07 * 0.39).epsilon(1e-12));
  CHECK(local.A()(1, 0) == doctest::Approx(-51.08).epsilon(1e-3));
  CHECK(local.A()(1, 1) == doctest::Approx(-1.6748).epsilon(1e-4));
  CHECK(local.B()(1, 0) == doctest::Approx(25.64).epsilon(1e-3));
}

TEST_CASE("disk LFR reproduces the product of both uncertain factors") {
  const DiskParameters p;
  const auto plant = unbalanced_disk_lfr(p);
  for (const auto& pt : sample_domain(plant.structure(), 30, 12)) {
    const double mass = p.mass + p.w_mass * pt[0];
    const double slope = p.p_nominal + p.w_p * pt[1];
    const auto local = evaluate_local(plant, pt);
    CHECK(local.A()(1, 0) == doctest::Approx(-p.c1() * mass * slope).epsilon(1e-12));
    CHECK(local.A()(1, 1) == doctest::Approx(-p.c2()));
  }
}

TEST_CASE("frozen-parameter local model matches the nonlinear rate equation") {
  const DiskParameters p;
  const auto plant = unbalanced_disk_lfr(p);
  Rng rng(3);
  std::uniform_real_distribution<double> angle(-4.0, 4.0), rate(-3.0, 3.0), mass_frac(-1.0, 1.0);
  for (int k = 0; k < 40; ++k) {
    const double x1 = angle(rng), x2 = rate(rng), d1 = mass_frac(rng);
    const double sinc = std::sin(x1) / x1;
    const GridPoint pt{d1, (sinc - p.p_nominal) / p.w_p};
    const auto local = evaluate_local(plant, pt);
    const auto model = unbalanced_disk_model(p.mass + p.w_mass * d1, p);
    Vector x(2);
    x << x1, x2;
    const Vector u = Vector::Constant(1, 0.3);
    const Vector expected = model.f(0.0, x, u);
    const Vector linear = local.A() * x + local.B() * u;
    CHECK(std::abs(linear(1) - expected(1)) <= 1e-10 * std::max(1.0, std::abs(expected(1))));
  }
}

TEST_CASE("evaluate_local passes through a plant without delta channels") {
  Rng rng(9);
  const auto raw = testing::random_stable(rng, 3, 2, 2);
  StateSpaceModel g(raw.A(), raw.B(), raw.C(), raw.D(), {{"w", 0, 1}, {"u", 1, 1}}, {{"z", 0, 1}, {"y", 1, 1}});
  const LfrPlant plant(g, DeltaStructure{}, PlantKind::kRobust);
  CHECK(evaluate_local(plant, GridPoint(Vector(0))) == g);
}

TEST_CASE("evaluate_local reports ill-posed loops") {
  StateSpaceModel g(Matrix::Zero(1, 1), Matrix::Ones(1, 2), Matrix::Ones(2, 1), Matrix::Identity(2, 2),
                    {{"delta", 0, 1}, {"w", 1, 1}}, {{"delta", 0, 1}, {"z", 1, 1}});
  const LfrPlant plant(g, DeltaStructure({{"a", 1, -1, 1}}), PlantKind::kRobust);
  CHECK_THROWS_AS(evaluate_local(plant, GridPoint{1.0}), WellPosednessError);
  CHECK_NOTHROW(evaluate_local(plant, GridPoint{0.5}));
}

TEST_CASE("affine LPV plants interpolate linearly between points") {
  const auto arm = robot_arm_models();
  const auto& plant = arm.genplant;
  const auto pts = sample_domain(plant.structure(), 20, 5);
  for (std::size_t k = 0; k + 1 < pts.size(); k += 2) {
    const GridPoint mid(0.5 * (pts[k].theta + pts[k + 1].theta));
    const auto p0 = evaluate_local(plant, pts[k]), p1 = evaluate_local(plant, pts[k + 1]);
    const auto pm = evaluate_local(plant, mid);
    CHECK((pm.A() - 0.5 * (p0.A() + p1.A())).norm() <= 1e-12 * (1.0 + pm.A().norm()));
    CHECK((pm.B() - 0.5 * (p0.B() + p1.B())).norm() <= 1e-12 * (1.0 + pm.B().norm()));
    CHECK((pm.C() - 0.5 * (p0.C() + p1.C())).norm() <= 1e-12 * (1.0 + pm.C().norm()));
    CHECK((pm.D() - 0.5 * (p0.D() + p1.D())).norm() <= 1e-12 * (1.0 + pm.D().norm()));
  }
}

TEST_CASE("local models keep exactly the performance and control channels") {
  const auto disk = evaluate_local(unbalanced_disk_genplant(), GridPoint{0.3, -0.2});
  CHECK(disk.nu() == 3);
  CHECK(disk.ny() == 3);
  CHECK(!disk.has_input_group("delta"));
  const auto arm = robot_arm_models();
  const auto local = evaluate_local(arm.genplant, GridPoint(arm.genplant.domain().center()));
  CHECK(local.nu() == 6);
  CHECK(local.ny() == 6);
}

TEST_CASE("sample_domain is uniform, in range and deterministic") {
  const DeltaStructure s({{"a", 1, -1, 1}, {"b", 1, -1, 1}});
  const auto pts = sample_domain(s, 5, 42);
  CHECK(pts.size() == 5);
  for (const auto& pt : pts) CHECK(s.box().contains(pt.theta));
  const auto again = sample_domain(s, 5, 42);
  for (std::size_t i = 0; i < pts.size(); ++i) CHECK(pts[i] == again[i]);

  const DeltaStructure unit({{"u", 1, 0, 1}});
  double mean = 0.0;
  for (const auto& pt : sample_domain(unit, 1000, 7)) mean += pt[0];
  CHECK(std::abs(mean / 1000.0 - 0.5) < 0.05);
}

TEST_CASE("box helpers") {
  const Box box{Vector::Constant(2, -1.0), Vector::Constant(2, 3.0)};
  const auto corners = box_corners(box);
  CHECK(corners.size() == 4);
  CHECK(corners.front().theta == box.lo);
  CHECK(corners.back().theta == box.hi);
  Vector x(2);
  x << 1.0, -1.0;
  CHECK(box.from_unit(box.to_unit(x)) == x);
  CHECK(max_distance(GridPoint{0.0, 1.0}, GridPoint{0.5, -1.0}) == 2.0);
}

TEST_CASE("plant JSON round trip keeps blocks, replication and kind") {
  const auto plant = unbalanced_disk_genplant();
  const auto back = nlohmann::json::parse(nlohmann::json(plant).dump()).get<LfrPlant>();
  CHECK(back.g() == plant.g());
  CHECK(back.kind() == PlantKind::kRobust);
  REQUIRE(back.structure().block_count() == 2);
  CHECK(back.structure().blocks()[1].rep == 2);
  REQUIRE(back.structure().replication());
  CHECK(*back.structure().replication() == *plant.structure().replication());
  const GridPoint pt{0.4, -0.9};
  CHECK(evaluate_local(back, pt) == evaluate_local(plant, pt));

  nlohmann::json bad = nlohmann::json(plant);
  bad["kind"] = "other";
  CHECK_THROWS_AS(bad.get<LfrPlant>(), ConfigError);
  bad.erase("delta_blocks");
  CHECK_THROWS_AS(bad.get<LfrPlant>(), ConfigError);
}
