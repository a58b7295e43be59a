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

#include "gridbo/sim.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>

#include "gridbo/errors.hpp"
#include "gridbo/rng.hpp"

namespace gridbo {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Dormand-Prince 5(4) tableau.
constexpr double kC[7] = {0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
constexpr double kA[7][6] = {
    {},
    {1.0 / 5},
    {3.0 / 40, 9.0 / 40},
    {44.0 / 45, -56.0 / 15, 32.0 / 9},
    {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
    {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
    {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84},
};
// Fifth-order weights minus the embedded fourth-order ones.
constexpr double kE[7] = {71.0 / 57600,     0.0,          -71.0 / 16695, 71.0 / 1920,
                          -17253.0 / 339200, 22.0 / 525, -1.0 / 40};

double ScaledRms(const Vector& v, const Vector& x, const Vector& x_new, const OdeOptions& o) {
  if (v.size() == 0) return 0.0;
  const Vector scale = (o.abs_tol + o.rel_tol * x.cwiseAbs().cwiseMax(x_new.cwiseAbs()).array()).matrix();
  return std::sqrt((v.array() / scale.array()).square().mean());
}

bool Blown(const Vector& x, const OdeOptions& o) { return !x.allFinite() || x.norm() > o.divergence_norm; }

// Controller state-space data in force at plant state x.
struct ControllerMatrices {
  Matrix ak, bk, ck, dk;
};

ControllerMatrices MatricesAt(const SimController& c, const Vector& x) {
  const ControllerParam k = std::holds_alternative<ControllerParam>(c)
                                ? std::get<ControllerParam>(c)
                                : [&] {
                                    const auto& s = std::get<ScheduledController>(c);
                                    return query_field(s.field, s.scheduling_map(x)).k;
                                  }();
  return {k.ak(), k.bk(), k.ck(), k.dk()};
}

const ControllerStructure& StructureOf(const SimController& c) {
  if (std::holds_alternative<ControllerParam>(c)) return std::get<ControllerParam>(c).structure();
  return std::get<ScheduledController>(c).field.structure();
}

}  // namespace

void OdeOptions::validate() const {
  if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) throw ConfigError("ODE tolerances must be positive");
  if (!(max_step > 0.0) || !(initial_step >= 0.0) || !(output_dt >= 0.0) || !(divergence_norm > 0.0) || max_steps < 1) {
    throw ConfigError("ODE step limits must be positive");
  }
}

OdeSolution ode_rk45(const OdeRhs& f, const Vector& x0, double t0, double t1, const OdeOptions& opts) {
  opts.validate();
  if (!(t1 >= t0)) throw DomainError("ode_rk45: t1 must not precede t0");
  OdeSolution out;
  out.t.push_back(t0);
  out.x.push_back(x0);
  if (Blown(x0, opts)) {
    out.diverged = true;
    return out;
  }
  if (t1 == t0) return out;

  const double span = t1 - t0;
  Vector x = x0;
  double t = t0;
  Vector k[7];
  k[0] = f(t, x);

  // Starting step from the size of x and x'.
  const double d0 = ScaledRms(x, x, x, opts), d1 = ScaledRms(k[0], x, x, opts);
  double h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 * span : 0.01 * d0 / d1;
  if (opts.initial_step > 0.0) h = opts.initial_step;
  h = std::min({h, opts.max_step, span});

  long next_index = 1;
  auto next_output = [&] {
    if (opts.output_dt == 0.0) return t1;
    const double next = t0 + static_cast<double>(next_index) * opts.output_dt;
    // Snap to t1 when rounding leaves a sliver.
    return t1 - next <= 1e-9 * opts.output_dt ? t1 : next;
  };
  bool rejected_last = false;

  while (t < t1) {
    if (out.steps + out.rejected >= opts.max_steps) {
      out.diverged = true;
      break;
    }
    const double target = next_output();
    double step = h;
    bool lands = false;
    // Stretch a step that would stop a rounding error short of the target.
    if (step >= (target - t) * (1.0 - 1e-6)) {
      step = target - t;
      lands = true;
    }
    if (step <= 1e-14 * std::max(1.0, std::abs(t))) {
      out.diverged = true;
      break;
    }
    for (int s = 1; s < 7; ++s) {
      Vector xs = x;
      for (int j = 0; j < s; ++j) xs += step * kA[s][j] * k[j];
      k[s] = f(t + kC[s] * step, xs);
    }
    Vector x_new = x;
    for (int j = 0; j < 6; ++j) x_new += step * kA[6][j] * k[j];
    Vector err = Vector::Zero(x.size());
    for (int j = 0; j < 7; ++j) err += step * kE[j] * k[j];
    const double e = ScaledRms(err, x, x_new, opts);

    if (!(e <= 1.0) || !x_new.allFinite()) {
      ++out.rejected;
      const double shrink = std::isfinite(e) ? std::max(0.2, 0.9 * std::pow(e, -0.2)) : 0.2;
      h = step * std::min(shrink, 0.9);
      rejected_last = true;
      continue;
    }
    ++out.steps;
    t = lands ? target : t + step;
    x = std::move(x_new);
    k[0] = k[6];  // first-same-as-last
    if (Blown(x, opts)) {
      out.diverged = true;
      break;
    }
    if (opts.output_dt == 0.0 || lands) {
      out.t.push_back(t);
      out.x.push_back(x);
      if (lands && opts.output_dt > 0.0) ++next_index;
    }
    double grow = e > 0.0 ? 0.9 * std::pow(e, -0.2) : 5.0;
    grow = std::clamp(grow, 0.2, rejected_last ? 1.0 : 5.0);
    rejected_last = false;
    // A step clipped to an output time says nothing about the natural size.
    if (!lands || step * grow > h) h = step * grow;
    h = std::min(h, opts.max_step);
  }
  return out;
}

SimResult simulate_closed_loop(const SimScenario& sc) {
  const NonlinearModel& m = sc.model;
  const ControllerStructure& ks = StructureOf(sc.controller);
  if (ks.n_u != m.nu || ks.n_y != m.ny) throw ShapeError("controller dimensions do not match the plant");
  if (sc.reference.channels() != m.ny) throw ShapeError("reference width does not match the plant output");
  if (!(sc.t_end > 0.0)) throw DomainError("simulation horizon must be positive");
  const InputDisturbance& dist = sc.disturbance;
  const bool noisy = dist.psd > 0.0;
  if (dist.psd < 0.0 || (noisy && !(dist.sample_time > 0.0))) throw ConfigError("invalid disturbance settings");
  if (dist.filter && (dist.filter->nu() != m.nu || dist.filter->ny() != m.nu)) {
    throw ShapeError("disturbance filter must map the plant input onto itself");
  }

  const StateSpaceModel* act = sc.actuator ? &*sc.actuator : nullptr;
  if (act && (act->nu() != m.nu || act->ny() != m.nu)) throw ShapeError("actuator must map the plant input onto itself");

  // Augmented state: plant, controller, actuator, noise filter.
  const Eigen::Index nx = m.nx, nk = ks.n_xk, na = act ? act->nx() : 0, nf = dist.filter ? dist.filter->nx() : 0;
  const Eigen::Index n = nx + nk + na + nf;

  auto disturbance = [&](const Vector& xf, const Vector& noise) -> Vector {
    if (!noisy) return Vector::Zero(m.nu);
    if (!dist.filter) return noise;
    return dist.filter->C() * xf + dist.filter->D() * noise;
  };
  // Plant input, output and reference at augmented state z; with `dz` set,
  // also the controller and actuator derivatives.
  auto signals = [&](double t, const Vector& z, const Vector& noise, Vector& u, Vector& y, Vector& r, Vector* dz) {
    const Vector x = z.head(nx), xk = z.segment(nx, nk), xa = z.segment(nx + nk, na), xf = z.tail(nf);
    y = m.h(x);
    r = sc.reference.value(t);
    const Vector e = r - y;
    const ControllerMatrices c = MatricesAt(sc.controller, x);
    Vector uk = c.dk * e;
    if (nk > 0) {
      uk += c.ck * xk;
      if (dz) dz->segment(nx, nk) = c.ak * xk + c.bk * e;
    }
    u = act ? Vector(act->D() * uk) : uk;
    if (na > 0) {
      u += act->C() * xa;
      if (dz) dz->segment(nx + nk, na) = act->A() * xa + act->B() * uk;
    }
    u += disturbance(xf, noise);
  };

  SimResult out;
  const Eigen::Index n_seg = noisy ? static_cast<Eigen::Index>(std::ceil(sc.t_end / dist.sample_time - 1e-12)) : 1;
  Rng rng(derive_seed(dist.seed, "input-noise"));
  std::normal_distribution<double> n01(0.0, 1.0);
  const double noise_sd = noisy ? std::sqrt(dist.psd / dist.sample_time) : 0.0;

  Vector z = Vector::Zero(n);
  for (Eigen::Index seg = 0; seg < n_seg; ++seg) {
    const double ta = noisy ? static_cast<double>(seg) * dist.sample_time : 0.0;
    const double tb = noisy ? std::min(sc.t_end, static_cast<double>(seg + 1) * dist.sample_time) : sc.t_end;
    Vector noise = Vector::Zero(m.nu);
    if (noisy) {
      for (Eigen::Index i = 0; i < m.nu; ++i) noise(i) = noise_sd * n01(rng);
    }
    auto rhs = [&](double t, const Vector& zz) {
      Vector u, y, r, dz(n);
      signals(t, zz, noise, u, y, r, &dz);
      dz.head(nx) = m.f(t, zz.head(nx), u);
      if (nf > 0) dz.tail(nf) = dist.filter->A() * zz.tail(nf) + dist.filter->B() * noise;
      return dz;
    };
    OdeOptions ode = sc.ode;
    const OdeSolution sol = ode_rk45(rhs, z, ta, tb, ode);
    out.steps += sol.steps;
    out.rejected += sol.rejected;
    // The first point of later segments repeats the previous segment's end.
    for (std::size_t i = (seg == 0 ? 0 : 1); i < sol.t.size(); ++i) {
      Vector u, y, r;
      signals(sol.t[i], sol.x[i], noise, u, y, r, nullptr);
      out.t.push_back(sol.t[i]);
      out.x.push_back(sol.x[i].head(nx));
      out.u.push_back(std::move(u));
      out.y.push_back(std::move(y));
      out.r.push_back(std::move(r));
    }
    z = sol.x.back();
    if (sol.diverged) {
      out.diverged = true;
      break;
    }
  }

  out.rmse = Vector::Constant(m.ny, kInf);
  if (!out.diverged) {
    Vector acc = Vector::Zero(m.ny);
    for (std::size_t i = 0; i < out.t.size(); ++i) acc += (out.r[i] - out.y[i]).cwiseAbs2();
    out.rmse = (acc / static_cast<double>(out.t.size())).cwiseSqrt();
  }
  return out;
}

std::vector<SimResult> simulate_batch(const std::vector<SimScenario>& scenarios, Execution exec) {
  return parallel_map<SimResult>(
      scenarios.size(), [&](std::size_t i) { return simulate_closed_loop(scenarios[i]); }, exec);
}

void write_sim_csv(std::ostream& os, const SimResult& res) {
  auto width = [&](const std::vector<Vector>& v) { return v.empty() ? Eigen::Index{0} : v.front().size(); };
  os << 't';
  for (const auto& [name, series] : {std::pair<const char*, const std::vector<Vector>*>{"x", &res.x},
                                     {"u", &res.u}, {"y", &res.y}, {"r", &res.r}}) {
    for (Eigen::Index i = 0; i < width(*series); ++i) os << ',' << name << '_' << i + 1;
  }
  os << '\n';
  const auto old = os.precision(17);
  for (std::size_t k = 0; k < res.t.size(); ++k) {
    os << res.t[k];
    for (const auto* series : {&res.x, &res.u, &res.y, &res.r}) {
      for (Eigen::Index i = 0; i < (*series)[k].size(); ++i) os << ',' << (*series)[k](i);
    }
    os << '\n';
  }
  os.precision(old);
}

}  // namespace gridbo
