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

#include "gridbo/lfr.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

#include "gridbo/errors.hpp"
#include "gridbo/rng.hpp"

namespace gridbo {

GridPoint::GridPoint(std::initializer_list<double> values) : theta(static_cast<Eigen::Index>(values.size())) {
  Eigen::Index i = 0;
  for (double v : values) theta(i++) = v;
}

double max_distance(const GridPoint& a, const GridPoint& b) {
  if (a.size() != b.size()) throw ShapeError("grid points of different dimension");
  return a.size() == 0 ? 0.0 : (a.theta - b.theta).cwiseAbs().maxCoeff();
}

bool Box::contains(const Vector& x, double tol) const {
  if (x.size() != dim()) return false;
  for (Eigen::Index i = 0; i < dim(); ++i) {
    if (!(x(i) >= lo(i) - tol && x(i) <= hi(i) + tol)) return false;
  }
  return true;
}

Vector Box::to_unit(const Vector& x) const {
  Vector u(dim());
  for (Eigen::Index i = 0; i < dim(); ++i) {
    const double width = hi(i) - lo(i);
    u(i) = width > 0.0 ? (x(i) - lo(i)) / width : 0.0;
  }
  return u;
}

Vector Box::from_unit(const Vector& u) const { return lo + (hi - lo).cwiseProduct(u); }

DeltaStructure::DeltaStructure(std::vector<DeltaBlock> blocks, std::optional<Matrix> replication)
    : blocks_(std::move(blocks)), replication_(std::move(replication)) {
  for (const auto& b : blocks_) {
    if (b.rep < 1) throw ShapeError("delta block '" + b.name + "' must have positive repetitions");
    if (!(b.lo <= b.hi) || !std::isfinite(b.lo) || !std::isfinite(b.hi)) {
      throw DomainError("delta block '" + b.name + "' has an invalid interval");
    }
    dimension_ += b.rep;
  }
  if (replication_ && replication_->rows() != dimension_) {
    throw ShapeError("replication matrix must have one row per repeated delta channel");
  }
}

Box DeltaStructure::box() const {
  Box box{Vector(block_count()), Vector(block_count())};
  for (Eigen::Index i = 0; i < block_count(); ++i) {
    box.lo(i) = blocks_[static_cast<std::size_t>(i)].lo;
    box.hi(i) = blocks_[static_cast<std::size_t>(i)].hi;
  }
  return box;
}

void DeltaStructure::check(const GridPoint& point) const {
  if (point.size() != block_count()) {
    throw ShapeError("grid point has " + std::to_string(point.size()) + " components, structure has " +
                     std::to_string(block_count()) + " blocks");
  }
  for (Eigen::Index i = 0; i < block_count(); ++i) {
    const auto& b = blocks_[static_cast<std::size_t>(i)];
    if (!(point[i] >= b.lo && point[i] <= b.hi)) {
      throw DomainError("value " + std::to_string(point[i]) + " of block '" + b.name + "' outside [" +
                        std::to_string(b.lo) + ", " + std::to_string(b.hi) + "]");
    }
  }
}

LfrPlant::LfrPlant(StateSpaceModel g, DeltaStructure structure, PlantKind kind)
    : g_(std::move(g)), structure_(std::move(structure)), kind_(kind) {
  const Eigen::Index in = g_.has_input_group(kDeltaChannel) ? g_.input_group(kDeltaChannel).size : 0;
  const Eigen::Index out = g_.has_output_group(kDeltaChannel) ? g_.output_group(kDeltaChannel).size : 0;
  if (structure_.dimension() > 0 && (!g_.has_input_group(kDeltaChannel) || !g_.has_output_group(kDeltaChannel))) {
    throw ShapeError("LFR plant needs a 'delta' group on both sides");
  }
  if (in != structure_.dimension() || out != structure_.loop_width()) {
    throw ShapeError("delta channel widths (" + std::to_string(in) + ", " + std::to_string(out) +
                     ") do not match the delta structure (" + std::to_string(structure_.dimension()) + ", " +
                     std::to_string(structure_.loop_width()) + ")");
  }
}

Matrix delta_matrix(const DeltaStructure& structure, const GridPoint& point) {
  structure.check(point);
  Matrix delta = Matrix::Zero(structure.dimension(), structure.dimension());
  Eigen::Index offset = 0;
  for (Eigen::Index i = 0; i < structure.block_count(); ++i) {
    const int rep = structure.blocks()[static_cast<std::size_t>(i)].rep;
    delta.diagonal().segment(offset, rep).setConstant(point[i]);
    offset += rep;
  }
  return delta;
}

StateSpaceModel evaluate_local(const LfrPlant& plant, const GridPoint& point) {
  Matrix delta = delta_matrix(plant.structure(), point);
  if (plant.structure().replication()) delta = delta * *plant.structure().replication();
  if (!plant.g().has_input_group(kDeltaChannel)) return plant.g();
  return redheffer_star(delta, plant.g(), kDeltaChannel);
}

std::vector<GridPoint> sample_domain(const DeltaStructure& structure, std::size_t count, std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const Box box = structure.box();
  std::vector<GridPoint> points;
  points.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    Vector u(box.dim());
    for (Eigen::Index i = 0; i < box.dim(); ++i) u(i) = unit(rng);
    points.emplace_back(box.from_unit(u));
  }
  return points;
}

std::vector<GridPoint> box_corners(const Box& box) {
  const Eigen::Index d = box.dim();
  if (d > 20) throw ShapeError("box_corners: too many dimensions");
  std::vector<GridPoint> corners;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << d); ++mask) {
    Vector c(d);
    for (Eigen::Index i = 0; i < d; ++i) c(i) = (mask >> i) & 1U ? box.hi(i) : box.lo(i);
    corners.emplace_back(std::move(c));
  }
  return corners;
}

void to_json(nlohmann::json& j, const GridPoint& p) {
  j = nlohmann::json::array();
  for (Eigen::Index i = 0; i < p.size(); ++i) j.push_back(p[i]);
}

void from_json(const nlohmann::json& j, GridPoint& p) {
  Vector t(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) t(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  p = GridPoint(std::move(t));
}

void to_json(nlohmann::json& j, const DeltaStructure& structure) {
  j = nlohmann::json::object();
  nlohmann::json blocks = nlohmann::json::array();
  for (const auto& b : structure.blocks()) {
    blocks.push_back({{"name", b.name}, {"rep", b.rep}, {"lo", b.lo}, {"hi", b.hi}});
  }
  j["delta_blocks"] = blocks;
  if (const auto& r = structure.replication()) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < r->rows(); ++i) {
      nlohmann::json row = nlohmann::json::array();
      for (Eigen::Index k = 0; k < r->cols(); ++k) row.push_back((*r)(i, k));
      rows.push_back(row);
    }
    j["delta_replication"] = rows;
  }
}

void from_json(const nlohmann::json& j, DeltaStructure& structure) {
  try {
    std::vector<DeltaBlock> blocks;
    for (const auto& b : j.at("delta_blocks")) {
      blocks.push_back({b.at("name").get<std::string>(), b.value("rep", 1), b.value("lo", -1.0), b.value("hi", 1.0)});
    }
    std::optional<Matrix> replication;
    if (j.contains("delta_replication")) {
      const auto& r = j["delta_replication"];
      Matrix m(static_cast<Eigen::Index>(r.size()), r.empty() ? 0 : static_cast<Eigen::Index>(r[0].size()));
      for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index k = 0; k < m.cols(); ++k)
          m(i, k) = r[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)].get<double>();
      replication = std::move(m);
    }
    structure = DeltaStructure(std::move(blocks), std::move(replication));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("delta structure JSON: ") + e.what());
  }
}

void to_json(nlohmann::json& j, const LfrPlant& plant) {
  to_json(j, plant.structure());
  j["G"] = plant.g();
  j["kind"] = plant.kind() == PlantKind::kRobust ? "robust" : "lpv";
}

void from_json(const nlohmann::json& j, LfrPlant& plant) {
  try {
    StateSpaceModel g = j.contains("G") ? j.at("G").get<StateSpaceModel>() : j.get<StateSpaceModel>();
    DeltaStructure structure;
    from_json(j, structure);
    const std::string kind = j.value("kind", "robust");
    if (kind != "robust" && kind != "lpv") throw ConfigError("plant kind must be 'robust' or 'lpv'");
    plant = LfrPlant(std::move(g), std::move(structure), kind == "robust" ? PlantKind::kRobust : PlantKind::kLpv);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("plant JSON: ") + e.what());
  }
}

}  // namespace gridbo
