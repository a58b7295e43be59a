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

#include "gridbo/rbf.hpp"

#include <cmath>
#include <limits>
#include <string>

#include <nlohmann/json.hpp>

#include "gridbo/errors.hpp"

namespace gridbo {
namespace {

constexpr double kMinRcond = 1e-12;
constexpr double kMaxResidual = 1e-8;

Vector ToVector(const nlohmann::json& j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

nlohmann::json FromVector(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

}  // namespace

double rbf_distance(const Vector& a, const Vector& b, double c) {
  if (a.size() != b.size()) throw ShapeError("rbf_distance: points differ in dimension");
  return std::sqrt((a - b).squaredNorm() + c * c);
}

Vector vec_rows(const Matrix& m) {
  Vector v(m.size());
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) v(k++) = m(i, j);
  return v;
}

Matrix mat_rows(const Vector& v, Eigen::Index rows, Eigen::Index cols) {
  if (v.size() != rows * cols) throw ShapeError("mat_rows: vector length does not match the shape");
  Matrix m(rows, cols);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = v(k++);
  return m;
}

double default_shape_constant(const std::vector<GridPoint>& nodes, const Box& box) {
  if (nodes.size() < 2) return 1.0;
  double total = 0.0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const Vector ui = box.to_unit(nodes[i].theta);
    double nearest = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < nodes.size(); ++j) {
      if (j != i) nearest = std::min(nearest, (ui - box.to_unit(nodes[j].theta)).norm());
    }
    total += nearest;
  }
  const double c = 0.5 * total / static_cast<double>(nodes.size());
  if (!(c > 0.0)) throw ConditioningError("RBF nodes coincide; prune duplicate nodes");
  return c;
}

RbfControllerField::RbfControllerField(std::vector<GridPoint> nodes, Box box, double c, Matrix weights,
                                       ControllerStructure structure)
    : nodes_(std::move(nodes)), box_(std::move(box)), c_(c), w_(std::move(weights)), structure_(structure) {
  if (!(c_ > 0.0) || !std::isfinite(c_)) throw DomainError("RBF shape constant must be positive");
  if (nodes_.empty()) throw ShapeError("RBF field needs at least one node");
  const auto n = static_cast<Eigen::Index>(nodes_.size());
  const Eigen::Index width = (structure_.n_xk + structure_.n_u) * (structure_.n_xk + structure_.n_y);
  if (w_.rows() != n || w_.cols() != width) throw ShapeError("RBF weight matrix has the wrong shape");
  for (const auto& p : nodes_) {
    if (p.size() != box_.dim()) throw ShapeError("RBF node dimension differs from the box");
  }
}

bool operator==(const RbfControllerField& a, const RbfControllerField& b) {
  return a.nodes_ == b.nodes_ && a.box_.lo == b.box_.lo && a.box_.hi == b.box_.hi && a.c_ == b.c_ &&
         a.w_.rows() == b.w_.rows() && a.w_.cols() == b.w_.cols() && a.w_ == b.w_ && a.structure_ == b.structure_;
}

RbfControllerField fit_field(const std::vector<ControllerParam>& snapshots, const std::vector<GridPoint>& nodes,
                             const Box& box, std::optional<double> c) {
  if (snapshots.empty() || snapshots.size() != nodes.size()) {
    throw ShapeError("fit_field needs one snapshot per node and at least one node");
  }
  const ControllerStructure s = snapshots.front().structure();
  for (const auto& k : snapshots) {
    if (!(k.structure() == s)) throw ShapeError("fit_field: snapshots differ in controller structure");
  }
  const double shape = c ? *c : default_shape_constant(nodes, box);
  if (!(shape > 0.0)) throw DomainError("RBF shape constant must be positive");

  const auto n = static_cast<Eigen::Index>(nodes.size());
  std::vector<Vector> unit;
  unit.reserve(nodes.size());
  for (const auto& p : nodes) {
    if (p.size() != box.dim()) throw ShapeError("RBF node dimension differs from the box");
    unit.push_back(box.to_unit(p.theta));
  }
  Matrix d(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) d(i, j) = rbf_distance(unit[i], unit[j], shape);
  Matrix m(n, (s.n_xk + s.n_u) * (s.n_xk + s.n_y));
  for (Eigen::Index i = 0; i < n; ++i) m.row(i) = vec_rows(snapshots[static_cast<std::size_t>(i)].stacked()).transpose();

  const Eigen::FullPivLU<Matrix> lu(d);
  const double rcond = lu.rcond();
  if (!(rcond >= kMinRcond) || !lu.isInvertible()) {
    throw ConditioningError("RBF distance matrix is near singular (rcond " + std::to_string(rcond) +
                            "); use a larger shape constant or prune nodes");
  }
  const Matrix w = lu.solve(m);
  const double residual = (d * w - m).cwiseAbs().maxCoeff() / (1.0 + m.cwiseAbs().maxCoeff());
  if (!(residual <= kMaxResidual)) {
    throw ConditioningError("RBF weight solve residual " + std::to_string(residual) + " is too large");
  }
  RbfControllerField field(nodes, box, shape, w, s);
  field.set_rcond(rcond);
  return field;
}

FieldQuery query_field(const RbfControllerField& field, const Vector& p) {
  if (p.size() != field.box().dim()) throw ShapeError("query point dimension differs from the field");
  const Vector u = field.box().to_unit(p);
  Vector row = Vector::Zero(field.weights().cols());
  for (std::size_t j = 0; j < field.nodes().size(); ++j) {
    const double dj = rbf_distance(u, field.box().to_unit(field.nodes()[j].theta), field.shape());
    row += dj * field.weights().row(static_cast<Eigen::Index>(j)).transpose();
  }
  const auto& s = field.structure();
  FieldQuery out;
  out.k = ControllerParam::from_stacked(s, mat_rows(row, s.n_xk + s.n_u, s.n_xk + s.n_y));
  out.extrapolated = !field.box().contains(p, 1e-12);
  return out;
}

void to_json(nlohmann::json& j, const RbfControllerField& field) {
  const auto& s = field.structure();
  nlohmann::json nodes = nlohmann::json::array();
  for (const auto& p : field.nodes()) nodes.push_back(p);
  j = nlohmann::json{{"nodes", nodes},
                     {"c", field.shape()},
                     {"W", FromVector(vec_rows(field.weights()))},
                     {"dims", {{"n_nodes", field.nodes().size()}, {"n_xk", s.n_xk}, {"n_u", s.n_u}, {"n_y", s.n_y}}},
                     {"fixed_zero_D", s.fixed_zero_d},
                     {"box", {{"lo", FromVector(field.box().lo)}, {"hi", FromVector(field.box().hi)}}},
                     {"rcond", field.rcond()}};
}

void from_json(const nlohmann::json& j, RbfControllerField& field) {
  try {
    ControllerStructure s;
    const auto& dims = j.at("dims");
    s.n_xk = dims.at("n_xk").get<Eigen::Index>();
    s.n_u = dims.at("n_u").get<Eigen::Index>();
    s.n_y = dims.at("n_y").get<Eigen::Index>();
    s.fixed_zero_d = j.value("fixed_zero_D", false);
    std::vector<GridPoint> nodes;
    for (const auto& p : j.at("nodes")) nodes.push_back(p.get<GridPoint>());
    if (dims.contains("n_nodes") && dims.at("n_nodes").get<std::size_t>() != nodes.size()) {
      throw ConfigError("RBF field JSON: node count does not match dims");
    }
    Box box{ToVector(j.at("box").at("lo")), ToVector(j.at("box").at("hi"))};
    const auto n = static_cast<Eigen::Index>(nodes.size());
    const Eigen::Index width = (s.n_xk + s.n_u) * (s.n_xk + s.n_y);
    const Vector w = ToVector(j.at("W"));
    if (w.size() != n * width) throw ConfigError("RBF field JSON: W has the wrong length");
    RbfControllerField out(std::move(nodes), std::move(box), j.at("c").get<double>(), mat_rows(w, n, width), s);
    out.set_rcond(j.value("rcond", 1.0));
    field = std::move(out);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("RBF field JSON: ") + e.what());
  } catch (const ShapeError& e) {
    throw ConfigError(std::string("RBF field JSON: ") + e.what());
  } catch (const DomainError& e) {
    throw ConfigError(std::string("RBF field JSON: ") + e.what());
  }
}

}  // namespace gridbo
