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
#include <limits>
#include <sstream>

#include "doctest.h"
#include "gridbo/errors.hpp"
#include "gridbo/gp.hpp"
#include "gridbo/rng.hpp"

using namespace gridbo;

namespace {

Box UnitSquare() { return Box{Vector::Zero(2), Vector::Ones(2)}; }

ObservationSet RandomData(Rng& rng, int n, int dim) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ObservationSet data;
  for (int i = 0; i < n; ++i) {
    Vector p(dim);
    for (int k = 0; k < dim; ++k) p(k) = u(rng);
    data.add(GridPoint(p), std::sin(3.0 * p.sum()) + p(0), ObservationTag::kInitialRandom);
  }
  return data;
}

}  // namespace

TEST_CASE("Matern 5/2 kernel values") {
  const GpHyperparams unit{1.0, 1.0, 0.0};
  CHECK(kernel_matern52(GridPoint{0.3}, GridPoint{0.3}, unit) == 1.0);
  const double r = std::sqrt(5.0);
  CHECK(kernel_matern52(GridPoint{0.0}, GridPoint{1.0}, unit) == doctest::Approx((1 + r + 5.0 / 3.0) * std::exp(-r)));
  CHECK(kernel_matern52(GridPoint{0.0}, GridPoint{1.0}, unit) == doctest::Approx(0.52400).epsilon(1e-4));
  CHECK(kernel_matern52(GridPoint{1.0, 2.0}, GridPoint{1.0, 2.0}, GpHyperparams{2.0, 0.7, 0.0}) == 4.0);
}

TEST_CASE("random Gram matrices are positive semidefinite") {
  Rng rng(8);
  std::uniform_int_distribution<int> count(2, 50);
  std::uniform_real_distribution<double> u(-2.0, 2.0), ls(0.05, 3.0);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = count(rng);
    const GpHyperparams h{1.0, ls(rng), 0.0};
    std::vector<Vector> pts;
    for (int i = 0; i < n; ++i) pts.push_back(Vector::NullaryExpr(3, [&](Eigen::Index) { return u(rng); }));
    Matrix k(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) k(i, j) = kernel_matern52(pts[i], pts[j], h);
    CHECK(Eigen::SelfAdjointEigenSolver<Matrix>(k).eigenvalues().minCoeff() >= -1e-8);
  }
}

TEST_CASE("log marginal likelihood closed-form cases") {
  ObservationSet one;
  one.add(GridPoint{0.2}, 0.0, ObservationTag::kInitialRandom);
  const double expected = -0.5 * std::log(2.0 * M_PI);
  CHECK(log_marginal_likelihood({1.0, 1.0, 0.0}, one) == doctest::Approx(expected).epsilon(1e-14));
  CHECK(expected == doctest::Approx(-0.9189).epsilon(1e-4));
  for (double l2 : {0.01, 0.3, 7.0}) CHECK(log_marginal_likelihood({1.3, l2, 0.0}, one) == log_marginal_likelihood({1.3, 1.0, 0.0}, one));

  // Two points: compare with the explicit 2x2 determinant and inverse.
  ObservationSet two;
  two.add(GridPoint{0.0}, 1.0, ObservationTag::kInitialRandom);
  two.add(GridPoint{0.5}, -2.0, ObservationTag::kInitialRandom);
  const GpHyperparams h{1.5, 0.8, 0.0};
  const double k12 = kernel_matern52(GridPoint{0.0}, GridPoint{0.5}, h), k11 = 1.5 * 1.5;
  const double det = k11 * k11 - k12 * k12;
  const double quad = (k11 * 1.0 + k11 * 4.0 - 2.0 * k12 * (1.0 * -2.0)) / det;
  CHECK(log_marginal_likelihood(h, two) == doctest::Approx(-0.5 * (quad + std::log(det) + 2.0 * std::log(2 * M_PI))));
}

TEST_CASE("duplicated points make the Gram matrix singular without jitter") {
  ObservationSet dup;
  dup.add(GridPoint{0.1, 0.1}, 1.0, ObservationTag::kInitialRandom);
  dup.add(GridPoint{0.1, 0.1}, 2.0, ObservationTag::kInitialRandom);
  CHECK_THROWS_AS(log_marginal_likelihood({1.0, 1.0, 0.0}, dup), ConditioningError);
  CHECK(std::isfinite(log_marginal_likelihood({1.0, 1.0, 0.0}, dup, std::nullopt, true)));
  const GpModel m(dup, {1.0, 1.0, 0.0});
  CHECK(m.jitter() > 0.0);
  CHECK(m.jitter() <= kMaxJitter);
}

TEST_CASE("posterior interpolates noise-free observations") {
  Rng rng(12);
  const auto data = RandomData(rng, 25, 2);
  const GpModel model(data, {1.0, 0.3, 0.0}, UnitSquare());
  REQUIRE(model.jitter() == 0.0);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto post = model.posterior(data.points()[i]);
    CHECK(std::abs(post.mu - data.values()[i]) < 1e-6);
    CHECK(post.sigma < 1e-6);
  }
}

TEST_CASE("posterior recovers the prior far from data") {
  ObservationSet data;
  data.add(GridPoint{0.0}, 3.0, ObservationTag::kInitialRandom);
  data.add(GridPoint{0.1}, 2.0, ObservationTag::kInitialRandom);
  const GpModel model(data, {2.0, 0.1, 0.0});
  const auto far = model.posterior(GridPoint{100.0});
  CHECK(std::abs(far.mu) < 1e-12);
  CHECK(far.sigma == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("posterior mean is odd for antisymmetric data") {
  ObservationSet data;
  data.add(GridPoint{-0.5, 0.2}, -1.0, ObservationTag::kInitialRandom);
  data.add(GridPoint{0.5, -0.2}, 1.0, ObservationTag::kInitialRandom);
  const GpModel model(data, {1.0, 0.6, 0.0});
  CHECK(std::abs(model.posterior(GridPoint{0.0, 0.0}).mu) < 1e-14);
}

TEST_CASE("adding an observation never increases posterior variance") {
  Rng rng(31);
  auto data = RandomData(rng, 10, 2);
  const GpHyperparams h{1.2, 0.4, 0.0};
  const GpModel before(data, h, UnitSquare());
  std::uniform_real_distribution<double> u(0.0, 1.0);
  data.add(GridPoint{u(rng), u(rng)}, 0.7, ObservationTag::kBoQuery);
  const GpModel after(data, h, UnitSquare());
  for (int q = 0; q < 20; ++q) {
    const GridPoint p{u(rng), u(rng)};
    const double s0 = before.posterior(p).sigma, s1 = after.posterior(p).sigma;
    CHECK(s1 * s1 <= s0 * s0 + 1e-8);
  }
}

TEST_CASE("fit recovers the length scale of a known GP") {
  // Draw 40 samples from a GP with lambda1 = 1, lambda2 = 0.5 on the unit
  // square and refit; the estimate should land within a factor of two.
  int hits = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    Rng rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::normal_distribution<double> n01(0.0, 1.0);
    const GpHyperparams truth{1.0, 0.5, 0.0};
    std::vector<Vector> pts;
    for (int i = 0; i < 40; ++i) pts.push_back(Vector::NullaryExpr(2, [&](Eigen::Index) { return u(rng); }));
    Matrix k(40, 40);
    for (int i = 0; i < 40; ++i)
      for (int j = 0; j < 40; ++j) k(i, j) = kernel_matern52(pts[i], pts[j], truth);
    k.diagonal().array() += 1e-10;
    const Vector y = k.llt().matrixL() * Vector::NullaryExpr(40, [&](Eigen::Index) { return n01(rng); });
    ObservationSet data;
    for (int i = 0; i < 40; ++i) data.add(GridPoint(pts[i]), y(i), ObservationTag::kInitialRandom);
    const GpModel model = fit(data, {5, seed, 300}, UnitSquare());
    const double l2 = model.hyper().lambda2;
    if (l2 >= 0.25 && l2 <= 1.0) ++hits;
  }
  CHECK(hits >= 4);
}

TEST_CASE("fit on constant-zero data drives the output scale to its floor") {
  ObservationSet data;
  for (double x : {0.0, 0.3, 0.7, 1.0}) data.add(GridPoint{x}, 0.0, ObservationTag::kInitialRandom);
  const GpModel model = fit(data, {4, 3, 300}, Box{Vector::Zero(1), Vector::Ones(1)});
  CHECK(model.hyper().lambda1 == doctest::Approx(1e-3).epsilon(1e-9));
}

TEST_CASE("fit is deterministic and ignores infinite observations") {
  Rng rng(5);
  auto data = RandomData(rng, 12, 2);
  data.add(GridPoint{0.5, 0.5}, std::numeric_limits<double>::infinity(), ObservationTag::kBoQuery);
  const GpModel a = fit(data, {6, 77, 300}, UnitSquare());
  const GpModel b = fit(data, {6, 77, 300}, UnitSquare());
  CHECK(a.hyper().lambda1 == b.hyper().lambda1);
  CHECK(a.hyper().lambda2 == b.hyper().lambda2);
  CHECK(a.size() == 12);
  ObservationSet tiny;
  tiny.add(GridPoint{0.0}, 1.0, ObservationTag::kInitialRandom);
  CHECK_THROWS_AS(fit(tiny, {}), DomainError);
}

TEST_CASE("fit beats the likelihood at every restart start point") {
  Rng rng(44);
  const auto data = RandomData(rng, 15, 2);
  const GpModel model = fit(data, {5, 1, 300}, UnitSquare());
  const double best = log_marginal_likelihood(model.hyper(), data, UnitSquare(), true);
  for (double l1 : {0.3, 1.0, 3.0})
    for (double l2 : {0.05, 0.3, 1.0, 5.0}) CHECK(best >= log_marginal_likelihood({l1, l2, 0.0}, data, UnitSquare(), true) - 1e-9);
}

TEST_CASE("observation CSV round trip") {
  ObservationSet data;
  data.add(GridPoint{0.1, -0.3}, 2.5, ObservationTag::kInitialRandom);
  data.add(GridPoint{1.0 / 3.0, 0.0}, std::numeric_limits<double>::infinity(), ObservationTag::kBoQuery);
  data.add(GridPoint{-1.0, 1.0}, 0.125, ObservationTag::kAllocation);
  std::stringstream ss;
  data.write_csv(ss);
  CHECK(ss.str().rfind("theta_1,theta_2,gamma,tag\n", 0) == 0);
  const auto back = ObservationSet::read_csv(ss);
  REQUIRE(back.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(back.points()[i] == data.points()[i]);
    CHECK(back.values()[i] == data.values()[i]);
    CHECK(back.tags()[i] == data.tags()[i]);
  }
  CHECK(back.finite_count() == 2);
}
