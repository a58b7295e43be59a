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
// Continuous-time LTI state-space algebra: frequency response, stability,
// Lyapunov equations, H-infinity / H2 / generalized H2 norms and the linear
// fractional interconnections used to build local models and closed loops.

#ifndef GRIDBO_LTI_HPP_
#define GRIDBO_LTI_HPP_

#include <complex>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json_fwd.hpp>

namespace gridbo {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using ComplexMatrix = Eigen::MatrixXcd;

/// Named contiguous range of input or output channels.
struct ChannelGroup {
  std::string name;
  Eigen::Index start = 0;
  Eigen::Index size = 0;

  friend bool operator==(const ChannelGroup&, const ChannelGroup&) = default;
};

/// Real state-space model (A, B, C, D) with named input and output groups.
///
/// Groups partition the channels: they are disjoint, contiguous and cover
/// every input (resp. output). When no groups are supplied a single group
/// named "in" / "out" covering all channels is created.
class StateSpaceModel {
 public:
  StateSpaceModel() = default;
  StateSpaceModel(Matrix a, Matrix b, Matrix c, Matrix d,
                  std::vector<ChannelGroup> input_groups = {},
                  std::vector<ChannelGroup> output_groups = {});

  /// Static gain without states.
  static StateSpaceModel Gain(const Matrix& d);

  const Matrix& A() const noexcept { return a_; }
  const Matrix& B() const noexcept { return b_; }
  const Matrix& C() const noexcept { return c_; }
  const Matrix& D() const noexcept { return d_; }

  Eigen::Index nx() const noexcept { return a_.rows(); }
  Eigen::Index nu() const noexcept { return b_.cols(); }
  Eigen::Index ny() const noexcept { return c_.rows(); }

  const std::vector<ChannelGroup>& input_groups() const noexcept { return in_groups_; }
  const std::vector<ChannelGroup>& output_groups() const noexcept { return out_groups_; }

  bool has_input_group(std::string_view name) const;
  bool has_output_group(std::string_view name) const;
  const ChannelGroup& input_group(std::string_view name) const;
  const ChannelGroup& output_group(std::string_view name) const;

  /// Channel indices of the listed groups, in listed order.
  std::vector<Eigen::Index> input_indices(const std::vector<std::string>& names) const;
  std::vector<Eigen::Index> output_indices(const std::vector<std::string>& names) const;

  /// Map from the listed input groups to the listed output groups. The
  /// returned model carries the selected groups, re-based to start at 0.
  StateSpaceModel subsystem(const std::vector<std::string>& inputs,
                            const std::vector<std::string>& outputs) const;

  friend bool operator==(const StateSpaceModel& lhs, const StateSpaceModel& rhs);

 private:
  Matrix a_, b_, c_, d_;
  std::vector<ChannelGroup> in_groups_;
  std::vector<ChannelGroup> out_groups_;
};

/// D + C (i*omega*I - A)^-1 B.
ComplexMatrix eval_freq(const StateSpaceModel& sys, double omega);

/// Largest singular value of the frequency response at omega.
double sigma_max_at(const StateSpaceModel& sys, double omega);

/// Largest real part of the eigenvalues of a; -inf for an empty matrix.
double spectral_abscissa(const Matrix& a);

/// Solves A^T X + X A + Q = 0 for a Hurwitz A (Kronecker form, n <= 30).
Matrix lyapunov_solve(const Matrix& a, const Matrix& q);

inline constexpr Eigen::Index kMaxLyapunovOrder = 30;

/// H-infinity norm to relative accuracy rel_tol.
double hinf_norm(const StateSpaceModel& sys, double rel_tol = 1e-6);

/// H2 norm; requires D = 0.
double h2_norm(const StateSpaceModel& sys);

/// Generalized H2 (L2 -> L-infinity) norm; requires D = 0.
double gen_h2_norm(const StateSpaceModel& sys);

/// Controllability Gramian W solving A W + W A^T + B B^T = 0.
Matrix controllability_gramian(const StateSpaceModel& sys);

/// Upper LFT: closes w_delta = delta * z_delta around the channel group
/// `channel` (present on both the input and the output side of g). delta has
/// as many rows as the input group and as many columns as the output group.
StateSpaceModel redheffer_star(const Matrix& delta, const StateSpaceModel& g,
                               std::string_view channel = "delta");

/// Lower LFT: closes controller k (input = measurement, output = control)
/// around plant p's `control` input group and `measurement` output group.
/// The closed-loop state is (x_p, x_k).
StateSpaceModel redheffer_star(const StateSpaceModel& p, const StateSpaceModel& k,
                               std::string_view control = "u",
                               std::string_view measurement = "y");

/// First-order transfer function (b1*s + b0) / (s + a0) realized in one state.
StateSpaceModel first_order(double b1, double b0, double a0);

/// Row-major nested arrays.
nlohmann::json matrix_to_json(const Matrix& m);
/// Throws ConfigError unless `j` is a rows x cols nested array.
Matrix matrix_from_json(const nlohmann::json& j, Eigen::Index rows, Eigen::Index cols);

void to_json(nlohmann::json& j, const StateSpaceModel& sys);
void from_json(const nlohmann::json& j, StateSpaceModel& sys);

}  // namespace gridbo

#endif  // GRIDBO_LTI_HPP_
