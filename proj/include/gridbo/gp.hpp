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
//
// Zero-mean Gaussian process regression with a Matern 5/2 kernel.

#ifndef GRIDBO_GP_HPP_
#define GRIDBO_GP_HPP_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Cholesky>

#include "gridbo/lfr.hpp"

namespace gridbo {

enum class ObservationTag { kInitialRandom, kBoQuery, kAllocation };

std::string to_string(ObservationTag tag);
ObservationTag parse_observation_tag(const std::string& text);

/// Cost observations. Infinite values are kept but never enter a fit.
class ObservationSet {
 public:
  void add(GridPoint point, double value, ObservationTag tag);
  std::size_t size() const noexcept { return points_.size(); }
  bool empty() const noexcept { return points_.empty(); }

  const std::vector<GridPoint>& points() const noexcept { return points_; }
  const std::vector<double>& values() const noexcept { return values_; }
  const std::vector<ObservationTag>& tags() const noexcept { return tags_; }

  std::size_t finite_count() const;
  /// Copy holding only the finite observations.
  ObservationSet finite() const;

  void write_csv(std::ostream& os) const;
  static ObservationSet read_csv(std::istream& is);

 private:
  std::vector<GridPoint> points_;
  std::vector<double> values_;
  std::vector<ObservationTag> tags_;
};

struct GpHyperparams {
  double lambda1 = 1.0;  // output scale
  double lambda2 = 1.0;  // length scale
  /// Diagonal regularization, relative to lambda1^2.
  double jitter = 0.0;
};

/// lambda1^2 (1 + sqrt5 r + 5 r^2 / 3) exp(-sqrt5 r), r = |a - b| / lambda2.
double kernel_matern52(const Vector& a, const Vector& b, const GpHyperparams& hyper);
double kernel_matern52(const GridPoint& a, const GridPoint& b, const GpHyperparams& hyper);

inline constexpr double kMaxJitter = 1e-6;

/// Standard-form log evidence -(y' K^-1 y + log det K + N log 2 pi) / 2 of the
/// finite observations. Points are mapped through `box` to the unit cube when
/// given. With `escalate` a failed factorization retries with jitter 1e-10,
/// 1e-9, ..., 1e-6; otherwise it throws ConditioningError immediately.
double log_marginal_likelihood(const GpHyperparams& hyper, const ObservationSet& data,
                               const std::optional<Box>& box = std::nullopt, bool escalate = false);

struct Posterior {
  double mu = 0.0;
  double sigma = 0.0;
};

class GpModel {
 public:
  /// Factorizes the Gram matrix of the finite observations, escalating the
  /// jitter on failure. Throws ConditioningError past kMaxJitter.
  GpModel(const ObservationSet& data, const GpHyperparams& hyper, const std::optional<Box>& box = std::nullopt);

  const GpHyperparams& hyper() const noexcept { return hyper_; }
  /// Jitter actually used after escalation.
  double jitter() const noexcept { return jitter_; }
  Eigen::Index size() const noexcept { return x_.rows(); }
  Eigen::Index dim() const noexcept { return x_.cols(); }
  const std::optional<Box>& box() const noexcept { return box_; }

  Posterior posterior(const GridPoint& query) const;
  /// Same, with the query already in unit-box coordinates.
  Posterior posterior_unit(const Vector& u) const;
  /// Largest finite observation.
  double best_observed() const;

 private:
  std::optional<Box> box_;
  GpHyperparams hyper_;
  double jitter_ = 0.0;
  Matrix x_;  // one scaled point per row
  Vector y_;
  Eigen::LLT<Matrix> llt_;
  Vector alpha_;
};

struct GpFitOptions {
  int restarts = 5;
  std::uint64_t seed = 0;
  int max_evaluations = 300;
};

/// Maximizes the log evidence over (lambda1, lambda2) by multistart
/// coordinate search in log space. Bounds: lambda1 in [1e-3, 1e3] * s with s
/// the sample standard deviation of the finite values (falling back to their
/// largest magnitude, then 1), lambda2 in [1e-2, 10] * diameter of the
/// (unit) domain. Needs at least two finite observations.
GpModel fit(const ObservationSet& data, const GpFitOptions& opts, const std::optional<Box>& box = std::nullopt);

}  // namespace gridbo

#endif  // GRIDBO_GP_HPP_
