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
#include "gridbo/errors.hpp"
#include "gridbo/lti.hpp"
#include "test_support.hpp"

using namespace gridbo;

namespace {

StateSpaceModel Lag(double a) { return first_order(0.0, 1.0, a); }

Matrix M(std::initializer_list<std::initializer_list<double>> rows) {
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

TEST_CASE("eval_freq of a first-order lag and a pure gain") {
  CHECK(std::abs(eval_freq(Lag(1.0), 0.0)(0, 0) - 1.0) < 1e-15);
  CHECK(std::abs(std::abs(eval_freq(Lag(1.0), 1.0)(0, 0)) - 1.0 / std::sqrt(2.0)) < 1e-12);
  const auto gain = StateSpaceModel::Gain(M({{3.0}}));
  CHECK(std::abs(eval_freq(gain, 17.0)(0, 0) - 3.0) < 1e-15);
}

TEST_CASE("eval_freq reports resonance on an imaginary-axis pole") {
  StateSpaceModel osc(M({{0, 1}, {-1, 0}}), M({{0}, {1}}), M({{1, 0}}), M({{0}}));
  CHECK_THROWS_AS(eval_freq(osc, 1.0), ResonanceError);
  CHECK_NOTHROW(eval_freq(osc, 2.0));
  CHECK_THROWS_AS(eval_freq(osc, -1.0), DomainError);
}

TEST_CASE("spectral abscissa") {
  CHECK(spectral_abscissa(-Matrix::Identity(2, 2)) == doctest::Approx(-1.0));
  CHECK(spectral_abscissa(M({{0, 1}, {-2, -3}})) == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(std::abs(spectral_abscissa(M({{0, 1}, {-1, 0}}))) < 1e-14);
}

TEST_CASE("lyapunov_solve closed-form cases") {
  CHECK(lyapunov_solve(M({{-1}}), M({{2}}))(0, 0) == doctest::Approx(1.0));
  const Matrix x = lyapunov_solve(-Matrix::Identity(2, 2), Matrix::Identity(2, 2));
  CHECK((x - 0.5 * Matrix::Identity(2, 2)).norm() < 1e-14);
  CHECK_THROWS_AS(lyapunov_solve(M({{1}}), M({{1}})), StabilityError);
}

TEST_CASE("lyapunov residual on random stable matrices") {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const auto sys = testing::random_stable(rng, 5, 1, 1);
    Matrix q = Matrix::Random(5, 5);
    q = q * q.transpose();
    const Matrix x = lyapunov_solve(sys.A(), q);
    const double residual = (sys.A().transpose() * x + x * sys.A() + q).norm();
    CHECK(residual <= 1e-8 * (sys.A().norm() * x.norm() + q.norm()));
    CHECK((x - x.transpose()).norm() == 0.0);
  }
}

TEST_CASE("hinf_norm closed-form values") {
  CHECK(hinf_norm(StateSpaceModel::Gain(M({{3.0}}))) == doctest::Approx(3.0));
  CHECK(hinf_norm(Lag(1.0)) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK_THROWS_AS(hinf_norm(first_order(0.0, 1.0, -1.0)), StabilityError);
}

TEST_CASE("hinf_norm of the tracking weight matches a dense sweep") {
  const auto wz1 = first_order(0.5012, 8.3818, 0.8382);
  const double oracle = testing::sweep_peak(wz1, 20000, 1e-5, 1e5);
  const double value = hinf_norm(wz1, 1e-8);
  CHECK(std::abs(value - oracle) / oracle < 1e-6);
  CHECK(std::abs(value - 10.0005) < 1e-2);
}

TEST_CASE("hinf_norm agrees with a 2000-point sweep on random stable systems") {
  Rng rng(2024);
  std::uniform_int_distribution<int> order(1, 8), io(1, 3);
  for (int trial = 0; trial < 50; ++trial) {
    const auto sys = testing::random_stable(rng, order(rng), io(rng), io(rng));
    const double value = hinf_norm(sys, 1e-7);
    const double sweep = testing::sweep_peak(sys, 2000, 1e-3, 1e3);
    CAPTURE(trial);
    CHECK(value >= sweep * (1.0 - 1e-9));
    CHECK((value - sweep) / value <= 1e-3);
    Eigen::JacobiSVD<Matrix> svd(sys.D());
    CHECK(value >= svd.singularValues()(0));
  }
}

TEST_CASE("h2_norm closed-form values and errors") {
  const double oracle = testing::h2_by_quadrature(Lag(1.0));
  CHECK(h2_norm(Lag(1.0)) == doctest::Approx(oracle).epsilon(1e-6));
  CHECK(h2_norm(Lag(1.0)) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-12));
  CHECK(h2_norm(Lag(2.0)) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK_THROWS_AS(h2_norm(first_order(0.0, 1.0, -1.0)), StabilityError);
  CHECK_THROWS_AS(h2_norm(first_order(1.0, 1.0, 1.0)), InfiniteNormError);
}

TEST_CASE("h2_norm agrees with impulse-response quadrature") {
  Rng rng(77);
  std::uniform_int_distribution<int> order(1, 6), io(1, 3);
  for (int trial = 0; trial < 15; ++trial) {
    const auto sys = testing::random_stable(rng, order(rng), io(rng), io(rng), true);
    const double oracle = testing::h2_by_quadrature(sys);
    CAPTURE(trial);
    CHECK(std::abs(h2_norm(sys) - oracle) / oracle < 1e-4);
  }
}

TEST_CASE("generalized H2 norm") {
  CHECK(gen_h2_norm(Lag(1.0)) == doctest::Approx(h2_norm(Lag(1.0))).epsilon(1e-14));
  CHECK(gen_h2_norm(Lag(1.0)) == doctest::Approx(0.70710678).epsilon(1e-7));
  const auto lag = Lag(3.0);
  StateSpaceModel diag(-3.0 * Matrix::Identity(2, 2), Matrix::Identity(2, 2), Matrix::Identity(2, 2),
                       Matrix::Zero(2, 2));
  CHECK(gen_h2_norm(diag) == doctest::Approx(gen_h2_norm(lag)).epsilon(1e-12));
}

TEST_CASE("upper star product: zero delta returns the nominal blocks") {
  Rng rng(5);
  const auto raw = testing::random_stable(rng, 3, 4, 4);
  StateSpaceModel g(raw.A(), raw.B(), raw.C(), raw.D(), {{"delta", 0, 2}, {"w", 2, 1}, {"u", 3, 1}},
                    {{"delta", 0, 2}, {"z", 2, 1}, {"y", 3, 1}});
  const auto p = redheffer_star(Matrix::Zero(2, 2), g);
  const auto nominal = g.subsystem({"w", "u"}, {"z", "y"});
  CHECK(p.A() == nominal.A());
  CHECK(p.B() == nominal.B());
  CHECK(p.C() == nominal.C());
  CHECK(p.D() == nominal.D());
  CHECK(p.input_groups() == nominal.input_groups());
}

TEST_CASE("upper star product: scalar substitution and ill-posedness") {
  // inputs (delta, w), outputs (delta, z): G_dd=0, G_dw=1, G_zd=1, G_zw=2.
  StateSpaceModel g = StateSpaceModel(Matrix(0, 0), Matrix(0, 2), Matrix(2, 0), M({{0, 1}, {1, 2}}),
                                      {{"delta", 0, 1}, {"w", 1, 1}}, {{"delta", 0, 1}, {"z", 1, 1}});
  CHECK(redheffer_star(M({{0.5}}), g).D()(0, 0) == doctest::Approx(2.5));

  StateSpaceModel bad(Matrix(0, 0), Matrix(0, 2), Matrix(2, 0), M({{1, 1}, {1, 2}}), {{"delta", 0, 1}, {"w", 1, 1}},
                      {{"delta", 0, 1}, {"z", 1, 1}});
  CHECK_THROWS_AS(redheffer_star(M({{1.0}}), bad), WellPosednessError);
  CHECK_THROWS_AS(redheffer_star(Matrix::Zero(2, 2), bad), ShapeError);
}

TEST_CASE("upper star product matches the pointwise LFT formula") {
  Rng rng(99);
  std::uniform_real_distribution<double> freq(0.0, 20.0);
  for (int trial = 0; trial < 10; ++trial) {
    const auto raw = testing::random_stable(rng, 4, 5, 5);
    StateSpaceModel g(raw.A(), raw.B(), raw.C(), 0.3 * raw.D(), {{"delta", 0, 2}, {"w", 2, 3}},
                      {{"delta", 0, 2}, {"z", 2, 3}});
    const Matrix delta = 0.3 * Matrix::Random(2, 2);
    const auto star = redheffer_star(delta, g);
    for (int k = 0; k < 50; ++k) {
      const double w = freq(rng);
      const ComplexMatrix full = eval_freq(g, w);
      const ComplexMatrix dc = delta.cast<std::complex<double>>();
      const ComplexMatrix gdd = full.topLeftCorner(2, 2), gdw = full.topRightCorner(2, 3);
      const ComplexMatrix gzd = full.bottomLeftCorner(3, 2), gzw = full.bottomRightCorner(3, 3);
      const ComplexMatrix expected =
          gzw + gzd * dc * (ComplexMatrix::Identity(2, 2) - gdd * dc).inverse() * gdw;
      CHECK((eval_freq(star, w) - expected).norm() < 1e-6);
    }
  }
}

TEST_CASE("lower star product closes the controller loop") {
  // Double integrator with a static PD-like controller u = -(2 y1 + 3 y2).
  StateSpaceModel p(M({{0, 1}, {0, 0}}), M({{0, 0}, {1, 1}}), M({{1, 0}, {1, 0}, {0, 1}}), Matrix::Zero(3, 2),
                    {{"w", 0, 1}, {"u", 1, 1}}, {{"z", 0, 1}, {"y", 1, 2}});
  const auto k = StateSpaceModel::Gain(M({{-2.0, -3.0}}));
  const auto cl = redheffer_star(p, k);
  CHECK(cl.nx() == 2);
  CHECK(spectral_abscissa(cl.A()) == doctest::Approx(-1.0).epsilon(1e-9));
  CHECK_THROWS_AS(redheffer_star(p, StateSpaceModel::Gain(M({{1.0}}))), ShapeError);
}

TEST_CASE("state-space JSON round trip is exact") {
  Rng rng(3);
  const auto raw = testing::random_stable(rng, 3, 3, 2);
  StateSpaceModel sys(raw.A(), raw.B(), raw.C(), raw.D(), {{"w", 0, 2}, {"u", 2, 1}}, {{"z", 0, 1}, {"y", 1, 1}});
  const std::string text = nlohmann::json(sys).dump();
  const auto back = nlohmann::json::parse(text).get<StateSpaceModel>();
  CHECK(back == sys);
  const auto gain = StateSpaceModel::Gain(M({{1.5, 2.0}}));
  CHECK(nlohmann::json::parse(nlohmann::json(gain).dump()).get<StateSpaceModel>() == gain);
}
