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
// Uncertain and LPV plants in linear fractional form, and realization of the
// local LTI model at a fixed grid point.

#ifndef GRIDBO_LFR_HPP_
#define GRIDBO_LFR_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "gridbo/lti.hpp"

namespace gridbo {

/// One value per delta block: eta_i for uncertain plants, p_i for LPV plants.
struct GridPoint {
  Vector theta;

  GridPoint() = default;
  explicit GridPoint(Vector t) : theta(std::move(t)) {}
  GridPoint(std::initializer_list<double> values);

  Eigen::Index size() const noexcept { return theta.size(); }
  double operator[](Eigen::Index i) const { return theta(i); }

  friend bool operator==(const GridPoint& a, const GridPoint& b) {
    return a.theta.size() == b.theta.size() && a.theta == b.theta;
  }
};

/// Infinity-norm distance between two points.
double max_distance(const GridPoint& a, const GridPoint& b);

/// Axis-aligned box with an affine map onto the unit cube.
struct Box {
  Vector lo;
  Vector hi;

  Eigen::Index dim() const noexcept { return lo.size(); }
  bool contains(const Vector& x, double tol = 0.0) const;
  /// Componentwise (x - lo) / (hi - lo); degenerate sides map to 0.
  Vector to_unit(const Vector& x) const;
  Vector from_unit(const Vector& u) const;
  Vector center() const { return 0.5 * (lo + hi); }
  double diameter() const { return (hi - lo).norm(); }
};

struct DeltaBlock {
  std::string name;
  int rep = 1;
  double lo = -1.0;
  double hi = 1.0;
};

/// Structured delta block: diag(eta_1 I_{n_1}, ..., eta_r I_{n_r}) R.
///
/// The optional replication matrix R (dimension x loop width) routes the
/// repeated block outputs onto the plant's z_delta channels when one
/// parameter enters through several non-diagonal channels. Without it the
/// block is square and R = I.
class DeltaStructure {
 public:
  DeltaStructure() = default;
  explicit DeltaStructure(std::vector<DeltaBlock> blocks, std::optional<Matrix> replication = std::nullopt);

  const std::vector<DeltaBlock>& blocks() const noexcept { return blocks_; }
  const std::optional<Matrix>& replication() const noexcept { return replication_; }
  Eigen::Index block_count() const noexcept { return static_cast<Eigen::Index>(blocks_.size()); }
  /// Sum of repetitions: width of the w_delta channel.
  Eigen::Index dimension() const noexcept { return dimension_; }
  /// Width of the z_delta channel.
  Eigen::Index loop_width() const noexcept { return replication_ ? replication_->cols() : dimension_; }

  Box box() const;
  /// Throws DomainError naming the first block whose value is out of range.
  void check(const GridPoint& point) const;

 private:
  std::vector<DeltaBlock> blocks_;
  std::optional<Matrix> replication_;
  Eigen::Index dimension_ = 0;
};

enum class PlantKind { kRobust, kLpv };

/// Nominal LTI block G with a "delta" channel group on both sides.
class LfrPlant {
 public:
  LfrPlant() = default;
  LfrPlant(StateSpaceModel g, DeltaStructure structure, PlantKind kind);

  const StateSpaceModel& g() const noexcept { return g_; }
  const DeltaStructure& structure() const noexcept { return structure_; }
  PlantKind kind() const noexcept { return kind_; }
  Box domain() const { return structure_.box(); }

 private:
  StateSpaceModel g_;
  DeltaStructure structure_;
  PlantKind kind_ = PlantKind::kRobust;
};

inline constexpr const char* kDeltaChannel = "delta";

/// Block-diagonal diag(eta_i I_{n_i}).
Matrix delta_matrix(const DeltaStructure& structure, const GridPoint& point);

/// Local LTI model P_theta = Delta(theta) * G with the delta groups closed.
StateSpaceModel evaluate_local(const LfrPlant& plant, const GridPoint& point);

/// count i.i.d. uniform points over the block intervals.
std::vector<GridPoint> sample_domain(const DeltaStructure& structure, std::size_t count, std::uint64_t seed);

/// Every corner of the box, ordered by binary counting over dimensions.
std::vector<GridPoint> box_corners(const Box& box);

void to_json(nlohmann::json& j, const GridPoint& p);
void from_json(const nlohmann::json& j, GridPoint& p);
void to_json(nlohmann::json& j, const DeltaStructure& structure);
void from_json(const nlohmann::json& j, DeltaStructure& structure);
void to_json(nlohmann::json& j, const LfrPlant& plant);
void from_json(const nlohmann::json& j, LfrPlant& plant);

}  // namespace gridbo

#endif  // GRIDBO_LFR_HPP_
