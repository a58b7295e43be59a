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
// Multiquadric RBF interpolation of controller snapshots.
//
// Each snapshot K_j at node theta_j is stacked as [[Ak, Bk], [Ck, Dk]] and
// flattened row by row into row j of M. The weights solve D W = M with
// D_ij = sqrt(|u_i - u_j|^2 + c^2), where u are node coordinates mapped onto
// the unit box, and a query at p returns mat(sum_j d(p, theta_j) W_j).

#ifndef GRIDBO_RBF_HPP_
#define GRIDBO_RBF_HPP_

#include <optional>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "gridbo/lfr.hpp"
#include "gridbo/synthesis.hpp"

namespace gridbo {

/// sqrt(|a - b|^2 + c^2).
double rbf_distance(const Vector& a, const Vector& b, double c);

/// Row-wise vectorization and its inverse.
Vector vec_rows(const Matrix& m);
Matrix mat_rows(const Vector& v, Eigen::Index rows, Eigen::Index cols);

/// Half the mean nearest-neighbour distance between nodes in unit-box
/// coordinates; 1 for a single node.
double default_shape_constant(const std::vector<GridPoint>& nodes, const Box& box);

class RbfControllerField {
 public:
  RbfControllerField() = default;
  RbfControllerField(std::vector<GridPoint> nodes, Box box, double c, Matrix weights, ControllerStructure structure);

  const std::vector<GridPoint>& nodes() const noexcept { return nodes_; }
  const Box& box() const noexcept { return box_; }
  double shape() const noexcept { return c_; }
  const Matrix& weights() const noexcept { return w_; }
  const ControllerStructure& structure() const noexcept { return structure_; }
  /// Reciprocal condition estimate of the distance matrix at fit time.
  double rcond() const noexcept { return rcond_; }
  void set_rcond(double r) noexcept { rcond_ = r; }

  friend bool operator==(const RbfControllerField& a, const RbfControllerField& b);

 private:
  std::vector<GridPoint> nodes_;
  Box box_;
  double c_ = 1.0;
  Matrix w_;
  ControllerStructure structure_;
  double rcond_ = 1.0;
};

/// Throws ShapeError on count or structure mismatch, DomainError for c <= 0
/// and ConditioningError when the distance matrix is numerically singular.
/// c defaults to default_shape_constant.
RbfControllerField fit_field(const std::vector<ControllerParam>& snapshots, const std::vector<GridPoint>& nodes,
                             const Box& box, std::optional<double> c = std::nullopt);

struct FieldQuery {
  ControllerParam k;
  /// p lies outside the field's box.
  bool extrapolated = false;
};

FieldQuery query_field(const RbfControllerField& field, const Vector& p);
inline FieldQuery query_field(const RbfControllerField& field, const GridPoint& p) {
  return query_field(field, p.theta);
}

void to_json(nlohmann::json& j, const RbfControllerField& field);
void from_json(const nlohmann::json& j, RbfControllerField& field);

}  // namespace gridbo

#endif  // GRIDBO_RBF_HPP_
