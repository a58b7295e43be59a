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

#include "gridbo/bayes_opt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <random>

#include "gridbo/errors.hpp"
#include "gridbo/rng.hpp"

namespace gridbo {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kInitialStep = 0.25;

struct Candidate {
  Vector u;
  double value = -kInf;
};

Posterior PosteriorAtUnit(const GpModel& model, const Box& domain, const Vector& u) {
  if (model.box()) return model.posterior_unit(u);
  return model.posterior(GridPoint(domain.from_unit(u)));
}

}  // namespace

void AcquisitionConfig::validate() const {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw ConfigError("epsilon must be positive");
  if (n_max < 1 || n_initial < 1 || multistart_count < 1 || local_steps < 1) {
    throw ConfigError("acquisition counts must be positive");
  }
}

AcquisitionConfig acquisition_profile(const std::string& name) {
  AcquisitionConfig cfg;
  if (name == "disk") {
    cfg.epsilon = 0.3;
    cfg.n_max = 20;
    cfg.n_initial = 5;
  } else if (name == "satellite") {
    cfg.epsilon = 0.5;
    cfg.n_max = 30;
    cfg.n_initial = 20;
  } else if (name == "robot_arm") {
    cfg.epsilon = 0.7;
    cfg.n_max = 40;
    cfg.n_initial = 20;
  } else {
    throw ConfigError("unknown BO profile '" + name + "'");
  }
  return cfg;
}

std::vector<std::string> acquisition_profile_names() { return {"disk", "satellite", "robot_arm"}; }

double expected_improvement(double mu, double sigma, double gamma_plus, double epsilon) {
  if (!(sigma > 0.0)) return 0.0;
  const double gap = mu - gamma_plus - epsilon;
  const double z = gap / sigma;
  const double cdf = 0.5 * std::erfc(-z / std::sqrt(2.0));
  const double pdf = std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI);
  return std::max(0.0, gap * cdf + sigma * pdf);
}

Vector maximize_in_unit_box(const std::function<double(const Vector&)>& f, Eigen::Index dim, int starts, int steps,
                            std::uint64_t seed, Execution exec) {
  if (starts < 1 || steps < 0) throw DomainError("maximize_in_unit_box: need at least one start");
  auto safe = [&](const Vector& u) {
    const double v = f(u);
    return std::isnan(v) ? -kInf : v;
  };
  const auto results = parallel_map<Candidate>(
      static_cast<std::size_t>(starts),
      [&](std::size_t i) {
        Rng rng(derive_seed(seed, "multistart", i));
        std::uniform_real_distribution<double> u01(0.0, 1.0);
        Candidate c;
        c.u.resize(dim);
        for (Eigen::Index d = 0; d < dim; ++d) c.u(d) = u01(rng);
        c.value = safe(c.u);
        double h = kInitialStep;
        for (int s = 0; s < steps && dim > 0; ++s) {
          Candidate best = c;
          for (Eigen::Index d = 0; d < dim; ++d) {
            for (double sign : {1.0, -1.0}) {
              Vector trial = c.u;
              trial(d) = std::clamp(trial(d) + sign * h, 0.0, 1.0);
              if (trial(d) == c.u(d)) continue;
              const double v = safe(trial);
              if (v > best.value) best = Candidate{trial, v};
            }
          }
          if (best.value > c.value) {
            c = std::move(best);
          } else {
            h *= 0.5;
          }
        }
        return c;
      },
      exec);
  std::size_t winner = 0;
  for (std::size_t i = 1; i < results.size(); ++i) {
    if (results[i].value > results[winner].value) winner = i;
  }
  return results[winner].u;
}

GridPoint maximize_acquisition(const GpModel& model, const Box& domain, const AcquisitionConfig& cfg) {
  const double incumbent = model.best_observed();
  auto ei = [&](const Vector& u) {
    const auto post = PosteriorAtUnit(model, domain, u);
    return expected_improvement(post.mu, post.sigma, incumbent, cfg.epsilon);
  };
  const Vector u = maximize_in_unit_box(ei, domain.dim(), cfg.multistart_count, cfg.local_steps, cfg.seed);
  Vector theta = domain.from_unit(u);
  // from_unit may round a hair outside the box.
  theta = theta.cwiseMax(domain.lo).cwiseMin(domain.hi);
  return GridPoint(theta);
}

BoResult bo_find_most_informative(const PointCost& cost, const Box& domain, ObservationSet data,
                                  const AcquisitionConfig& cfg) {
  cfg.validate();
  BoResult out;
  auto evaluate = [&](const GridPoint& p) {
    ++out.cost_evaluations;
    try {
      const double v = cost(p);
      return std::isnan(v) ? kInf : v;
    } catch (const Error&) {
      return kInf;
    }
  };
  auto unstable = [&](const GridPoint& p) {
    out.theta_star = p;
    out.predicted = kInf;
    out.unstable = true;
    out.data = std::move(data);
    return out;
  };

  for (std::size_t i = 0; i < data.size(); ++i) {
    if (!std::isfinite(data.values()[i])) return unstable(data.points()[i]);
  }
  if (data.finite_count() < 2) {
    Rng rng(derive_seed(cfg.seed, "bo-init"));
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    const int draws = std::max<int>(cfg.n_initial, 2 - static_cast<int>(data.finite_count()));
    for (int i = 0; i < draws; ++i) {
      Vector u(domain.dim());
      for (Eigen::Index d = 0; d < domain.dim(); ++d) u(d) = u01(rng);
      GridPoint p(domain.from_unit(u));
      const double v = evaluate(p);
      data.add(p, v, ObservationTag::kInitialRandom);
      if (!std::isfinite(v)) return unstable(p);
    }
  }

  auto fit_at = [&](int iteration) {
    GpFitOptions gp = cfg.gp;
    gp.seed = derive_seed(cfg.seed, "gp", static_cast<std::uint64_t>(iteration));
    return fit(data, gp, domain);
  };

  int iteration = 0;
  while (static_cast<int>(data.size()) < cfg.n_max) {
    const GpModel model = fit_at(iteration);
    AcquisitionConfig acq = cfg;
    acq.seed = derive_seed(cfg.seed, "acquisition", static_cast<std::uint64_t>(iteration));
    const GridPoint theta = maximize_acquisition(model, domain, acq);
    const auto post = model.posterior(theta);
    BoTraceRow row;
    row.iteration = iteration;
    row.theta = theta;
    row.ei = expected_improvement(post.mu, post.sigma, model.best_observed(), cfg.epsilon);
    row.gamma = evaluate(theta);
    row.gamma_plus = std::max(model.best_observed(), row.gamma);
    data.add(theta, row.gamma, ObservationTag::kBoQuery);
    out.trace.push_back(row);
    ++iteration;
    if (!std::isfinite(row.gamma)) return unstable(theta);
  }

  const GpModel model = fit_at(iteration);
  auto mean = [&](const Vector& u) { return PosteriorAtUnit(model, domain, u).mu; };
  const Vector u = maximize_in_unit_box(mean, domain.dim(), cfg.multistart_count, cfg.local_steps,
                                        derive_seed(cfg.seed, "mean-argmax"));
  out.theta_star = GridPoint(domain.from_unit(u).cwiseMax(domain.lo).cwiseMin(domain.hi));
  out.predicted = model.posterior(out.theta_star).mu;
  out.data = std::move(data);
  return out;
}

void write_bo_trace_csv(std::ostream& os, const std::vector<BoTraceRow>& trace) {
  const Eigen::Index dim = trace.empty() ? 0 : trace.front().theta.size();
  os << "iteration";
  for (Eigen::Index d = 0; d < dim; ++d) os << ",theta_" << d + 1;
  os << ",ei,gamma,gamma_plus\n";
  const auto old = os.precision(17);
  for (const auto& r : trace) {
    os << r.iteration;
    for (Eigen::Index d = 0; d < dim; ++d) os << ',' << r.theta[d];
    os << ',' << r.ei << ',' << r.gamma << ',' << r.gamma_plus << '\n';
  }
  os.precision(old);
}

}  // namespace gridbo
