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

#include "gridbo/gp.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include "gridbo/errors.hpp"
#include "gridbo/parallel.hpp"
#include "gridbo/rng.hpp"

namespace gridbo {
namespace {

constexpr double kSqrt5 = 2.23606797749978969640917366873127623544;
constexpr double kLog2Pi = 1.83787706640934548356065947281123527972;
constexpr double kPivotFloor = 1e-13;

double Matern(double r2, double lambda1, double lambda2) {
  const double r = std::sqrt(r2) / lambda2;
  return lambda1 * lambda1 * (1.0 + kSqrt5 * r + 5.0 * r * r / 3.0) * std::exp(-kSqrt5 * r);
}

Matrix ScaledPoints(const ObservationSet& data, const std::optional<Box>& box) {
  const Eigen::Index d = data.empty() ? 0 : data.points().front().size();
  Matrix x(static_cast<Eigen::Index>(data.size()), d);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& p = data.points()[i].theta;
    if (p.size() != d) throw ShapeError("observations of mixed dimension");
    x.row(static_cast<Eigen::Index>(i)) = (box ? box->to_unit(p) : p).transpose();
  }
  return x;
}

Matrix Gram(const Matrix& x, double lambda1, double lambda2) {
  const Eigen::Index n = x.rows();
  Matrix k(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    k(i, i) = lambda1 * lambda1;
    for (Eigen::Index j = 0; j < i; ++j) {
      k(i, j) = k(j, i) = Matern((x.row(i) - x.row(j)).squaredNorm(), lambda1, lambda2);
    }
  }
  return k;
}

/// Cholesky that also rejects numerically zero pivots.
bool Factor(const Matrix& k, double jitter, Eigen::LLT<Matrix>& llt) {
  Matrix kj = k;
  const double scale = k.diagonal().maxCoeff();
  kj.diagonal().array() += jitter * scale;
  llt.compute(kj);
  if (llt.info() != Eigen::Success) return false;
  const Vector diag = llt.matrixLLT().diagonal();
  return (diag.array().square() > kPivotFloor * scale).all();
}

/// Factors with the given jitter, then climbs the ladder if allowed.
double FactorWithLadder(const Matrix& k, double jitter, bool escalate, Eigen::LLT<Matrix>& llt) {
  if (Factor(k, jitter, llt)) return jitter;
  if (escalate) {
    for (double j = 1e-10; j <= kMaxJitter * 1.0000001; j *= 10.0) {
      if (j <= jitter) continue;
      if (Factor(k, j, llt)) return j;
    }
  }
  throw ConditioningError("Gram matrix is not positive definite" +
                          std::string(escalate ? " after jitter escalation" : ""));
}

Vector FiniteValues(const ObservationSet& data) {
  Vector y(static_cast<Eigen::Index>(data.size()));
  for (std::size_t i = 0; i < data.size(); ++i) y(static_cast<Eigen::Index>(i)) = data.values()[i];
  return y;
}

}  // namespace

std::string to_string(ObservationTag tag) {
  switch (tag) {
    case ObservationTag::kInitialRandom: return "initial-random";
    case ObservationTag::kBoQuery: return "bo-query";
    case ObservationTag::kAllocation: return "allocation";
  }
  return "unknown";
}

ObservationTag parse_observation_tag(const std::string& text) {
  if (text == "initial-random") return ObservationTag::kInitialRandom;
  if (text == "bo-query") return ObservationTag::kBoQuery;
  if (text == "allocation") return ObservationTag::kAllocation;
  throw ConfigError("unknown observation tag '" + text + "'");
}

void ObservationSet::add(GridPoint point, double value, ObservationTag tag) {
  if (!points_.empty() && point.size() != points_.front().size()) throw ShapeError("observation dimension mismatch");
  if (std::isnan(value)) throw DomainError("observation value is NaN");
  points_.push_back(std::move(point));
  values_.push_back(value);
  tags_.push_back(tag);
}

std::size_t ObservationSet::finite_count() const {
  return static_cast<std::size_t>(std::count_if(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); }));
}

ObservationSet ObservationSet::finite() const {
  ObservationSet out;
  for (std::size_t i = 0; i < size(); ++i) {
    if (std::isfinite(values_[i])) out.add(points_[i], values_[i], tags_[i]);
  }
  return out;
}

void ObservationSet::write_csv(std::ostream& os) const {
  const Eigen::Index d = empty() ? 0 : points_.front().size();
  for (Eigen::Index i = 0; i < d; ++i) os << "theta_" << (i + 1) << ',';
  os << "gamma,tag\n";
  std::ostringstream line;
  line.precision(17);
  for (std::size_t k = 0; k < size(); ++k) {
    line.str("");
    for (Eigen::Index i = 0; i < d; ++i) line << points_[k][i] << ',';
    line << values_[k] << ',' << to_string(tags_[k]) << '\n';
    os << line.str();
  }
}

ObservationSet ObservationSet::read_csv(std::istream& is) {
  std::string header;
  if (!std::getline(is, header)) throw ConfigError("observation CSV is empty");
  const auto columns = std::count(header.begin(), header.end(), ',') + 1;
  if (columns < 2) throw ConfigError("observation CSV header must end with gamma,tag");
  const auto d = static_cast<Eigen::Index>(columns - 2);
  ObservationSet out;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    Vector theta(d);
    for (Eigen::Index i = 0; i < d; ++i) {
      if (!std::getline(ss, cell, ',')) throw ConfigError("short observation row");
      theta(i) = std::stod(cell);
    }
    if (!std::getline(ss, cell, ',')) throw ConfigError("observation row without gamma");
    const double gamma = std::stod(cell);
    std::getline(ss, cell);
    out.add(GridPoint(std::move(theta)), gamma, parse_observation_tag(cell));
  }
  return out;
}

double kernel_matern52(const Vector& a, const Vector& b, const GpHyperparams& hyper) {
  return Matern((a - b).squaredNorm(), hyper.lambda1, hyper.lambda2);
}

double kernel_matern52(const GridPoint& a, const GridPoint& b, const GpHyperparams& hyper) {
  return kernel_matern52(a.theta, b.theta, hyper);
}

double log_marginal_likelihood(const GpHyperparams& hyper, const ObservationSet& data, const std::optional<Box>& box,
                               bool escalate) {
  if (!(hyper.lambda1 > 0.0) || !(hyper.lambda2 > 0.0) || hyper.jitter < 0.0) {
    throw DomainError("GP hyperparameters must be positive");
  }
  const ObservationSet fin = data.finite();
  if (fin.empty()) throw DomainError("log marginal likelihood needs a finite observation");
  const Matrix x = ScaledPoints(fin, box);
  const Vector y = FiniteValues(fin);
  Eigen::LLT<Matrix> llt;
  FactorWithLadder(Gram(x, hyper.lambda1, hyper.lambda2), hyper.jitter, escalate, llt);
  const Vector w = llt.matrixL().solve(y);
  const double logdet = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  return -0.5 * (w.squaredNorm() + logdet + static_cast<double>(y.size()) * kLog2Pi);
}

GpModel::GpModel(const ObservationSet& data, const GpHyperparams& hyper, const std::optional<Box>& box)
    : box_(box), hyper_(hyper) {
  if (!(hyper.lambda1 > 0.0) || !(hyper.lambda2 > 0.0) || hyper.jitter < 0.0) {
    throw DomainError("GP hyperparameters must be positive");
  }
  const ObservationSet fin = data.finite();
  if (fin.empty()) throw DomainError("GP model needs a finite observation");
  x_ = ScaledPoints(fin, box_);
  y_ = FiniteValues(fin);
  jitter_ = FactorWithLadder(Gram(x_, hyper.lambda1, hyper.lambda2), hyper.jitter, true, llt_);
  alpha_ = llt_.solve(y_);
}

Posterior GpModel::posterior_unit(const Vector& u) const {
  Vector k(size());
  for (Eigen::Index i = 0; i < size(); ++i) {
    k(i) = Matern((x_.row(i).transpose() - u).squaredNorm(), hyper_.lambda1, hyper_.lambda2);
  }
  const double mu = k.dot(alpha_);
  const Vector v = llt_.matrixL().solve(k);
  const double var = hyper_.lambda1 * hyper_.lambda1 - v.squaredNorm();
  return {mu, var > 0.0 ? std::sqrt(var) : 0.0};
}

Posterior GpModel::posterior(const GridPoint& query) const {
  if (query.size() != dim()) throw ShapeError("GP query dimension mismatch");
  return posterior_unit(box_ ? box_->to_unit(query.theta) : query.theta);
}

double GpModel::best_observed() const { return y_.maxCoeff(); }

GpModel fit(const ObservationSet& data, const GpFitOptions& opts, const std::optional<Box>& box) {
  const ObservationSet fin = data.finite();
  if (fin.size() < 2) throw DomainError("GP fit needs at least two finite observations");
  if (opts.restarts < 1) throw DomainError("GP fit needs at least one restart");

  const Vector y = FiniteValues(fin);
  double scale = y.size() > 1 ? std::sqrt((y.array() - y.mean()).square().sum() / static_cast<double>(y.size() - 1)) : 0.0;
  if (!(scale > 0.0)) scale = y.cwiseAbs().maxCoeff();
  if (!(scale > 0.0)) scale = 1.0;
  const Eigen::Index d = fin.points().front().size();
  double diameter = box ? Box{box->to_unit(box->lo), box->to_unit(box->hi)}.diameter()
                        : [&] {
                            const Matrix x = ScaledPoints(fin, box);
                            return (x.colwise().maxCoeff() - x.colwise().minCoeff()).norm();
                          }();
  if (!(diameter > 0.0)) diameter = std::sqrt(static_cast<double>(std::max<Eigen::Index>(d, 1)));

  const Eigen::Vector2d lo(std::log(1e-3 * scale), std::log(1e-2 * diameter));
  const Eigen::Vector2d hi(std::log(1e3 * scale), std::log(10.0 * diameter));

  const Matrix x = ScaledPoints(fin, box);
  auto objective = [&](const Eigen::Vector2d& z) {
    Eigen::LLT<Matrix> llt;
    try {
      FactorWithLadder(Gram(x, std::exp(z(0)), std::exp(z(1))), 0.0, true, llt);
    } catch (const ConditioningError&) {
      return -std::numeric_limits<double>::infinity();
    }
    const Vector w = llt.matrixL().solve(y);
    return -0.5 * (w.squaredNorm() + 2.0 * llt.matrixLLT().diagonal().array().log().sum() +
                   static_cast<double>(y.size()) * kLog2Pi);
  };

  struct Result {
    Eigen::Vector2d z;
    double value;
  };
  const auto results = parallel_map<Result>(static_cast<std::size_t>(opts.restarts), [&](std::size_t r) {
    Eigen::Vector2d z;
    if (r == 0) {
      z << std::log(scale), std::log(0.2 * diameter);
    } else {
      Rng rng(derive_seed(opts.seed, "gp-fit", r));
      std::uniform_real_distribution<double> u(0.0, 1.0);
      for (int i = 0; i < 2; ++i) z(i) = lo(i) + u(rng) * (hi(i) - lo(i));
    }
    z = z.cwiseMax(lo).cwiseMin(hi);
    double best = objective(z);
    int evals = 1;
    double step = 1.0;
    while (step > 1e-4 && evals < opts.max_evaluations) {
      bool improved = false;
      for (int i = 0; i < 2; ++i) {
        for (double sign : {1.0, -1.0}) {
          Eigen::Vector2d c = z;
          c(i) = std::clamp(c(i) + sign * step, lo(i), hi(i));
          if (c(i) == z(i)) continue;
          const double v = objective(c);
          ++evals;
          if (v > best) {
            best = v;
            z = c;
            improved = true;
            break;
          }
        }
      }
      if (!improved) step *= 0.5;
    }
    return Result{z, best};
  });

  std::size_t winner = 0;
  for (std::size_t r = 1; r < results.size(); ++r) {
    if (results[r].value > results[winner].value) winner = r;
  }
  if (!std::isfinite(results[winner].value)) throw ConditioningError("GP fit failed in every restart");
  return GpModel(fin, GpHyperparams{std::exp(results[winner].z(0)), std::exp(results[winner].z(1)), 0.0}, box);
}

}  // namespace gridbo
