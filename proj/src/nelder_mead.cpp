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

#include "gridbo/nelder_mead.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace gridbo {

NelderMeadResult nelder_mead(const std::function<double(const Vector&)>& f, const Vector& x0,
                             const NelderMeadOptions& opts) {
  const Eigen::Index n = x0.size();
  NelderMeadResult out;
  // Hard budget: past it, points read as +inf without calling f.
  auto eval = [&](const Vector& x) {
    if (out.evaluations >= std::max(opts.max_evaluations, 1)) return std::numeric_limits<double>::infinity();
    ++out.evaluations;
    const double v = f(x);
    return std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
  };
  auto stop = [&](double v) { return opts.stop && opts.stop(v); };

  out.x = x0;
  out.value = eval(x0);
  if (n == 0 || stop(out.value)) {
    out.converged = n == 0;
    return out;
  }

  // Dimension-adaptive coefficients.
  const double dn = static_cast<double>(n);
  const double alpha = 1.0, beta = 1.0 + 2.0 / dn, gamma = 0.75 - 0.5 / dn, delta = std::max(1.0 - 1.0 / dn, 0.5);

  std::vector<Vector> v(static_cast<std::size_t>(n + 1));
  std::vector<double> fv(static_cast<std::size_t>(n + 1));
  auto build = [&](const Vector& base, double base_value) {
    v[0] = base;
    fv[0] = base_value;
    for (Eigen::Index i = 0; i < n; ++i) {
      v[static_cast<std::size_t>(i + 1)] = base;
      v[static_cast<std::size_t>(i + 1)](i) += opts.initial_step;
      fv[static_cast<std::size_t>(i + 1)] = eval(v[static_cast<std::size_t>(i + 1)]);
    }
  };
  build(x0, out.value);

  std::vector<std::size_t> order(v.size());
  double last_restart_best = std::numeric_limits<double>::infinity();
  while (out.evaluations < opts.max_evaluations) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
    {
      std::vector<Vector> vs;
      std::vector<double> fs;
      for (auto i : order) {
        vs.push_back(std::move(v[i]));
        fs.push_back(fv[i]);
      }
      v = std::move(vs);
      fv = std::move(fs);
    }
    if (fv[0] < out.value) {
      out.value = fv[0];
      out.x = v[0];
    }
    if (stop(out.value)) break;

    const double best = fv[0], worst = fv[static_cast<std::size_t>(n)];
    double diameter = 0.0;
    for (std::size_t i = 1; i < v.size(); ++i) diameter = std::max(diameter, (v[i] - v[0]).cwiseAbs().maxCoeff());
    const bool flat = std::isfinite(worst) && worst - best <= opts.ftol * (1.0 + std::abs(best));
    const bool small = diameter <= opts.xtol * (1.0 + v[0].cwiseAbs().maxCoeff());
    if (flat || (small && std::isfinite(best))) {
      out.converged = true;
      const bool progress = !std::isfinite(last_restart_best) ||
                            last_restart_best - best > opts.ftol * (1.0 + std::abs(best));
      if (!opts.restart_on_convergence || !progress || out.evaluations + n >= opts.max_evaluations) break;
      last_restart_best = best;
      out.converged = false;
      build(v[0], fv[0]);
      continue;
    }

    Vector centroid = Vector::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i) centroid += v[static_cast<std::size_t>(i)];
    centroid /= dn;
    const Vector& xw = v[static_cast<std::size_t>(n)];

    const Vector xr = centroid + alpha * (centroid - xw);
    const double fr = eval(xr);
    bool shrink = false;
    if (fr < fv[0]) {
      const Vector xe = centroid + beta * (xr - centroid);
      const double fe = eval(xe);
      if (fe < fr) {
        v[static_cast<std::size_t>(n)] = xe;
        fv[static_cast<std::size_t>(n)] = fe;
      } else {
        v[static_cast<std::size_t>(n)] = xr;
        fv[static_cast<std::size_t>(n)] = fr;
      }
    } else if (fr < fv[static_cast<std::size_t>(n - 1)]) {
      v[static_cast<std::size_t>(n)] = xr;
      fv[static_cast<std::size_t>(n)] = fr;
    } else if (fr < worst) {
      const Vector xc = centroid + gamma * (xr - centroid);
      const double fc = eval(xc);
      if (fc <= fr) {
        v[static_cast<std::size_t>(n)] = xc;
        fv[static_cast<std::size_t>(n)] = fc;
      } else {
        shrink = true;
      }
    } else {
      const Vector xc = centroid + gamma * (xw - centroid);
      const double fc = eval(xc);
      if (fc < worst) {
        v[static_cast<std::size_t>(n)] = xc;
        fv[static_cast<std::size_t>(n)] = fc;
      } else {
        shrink = true;
      }
    }
    if (shrink) {
      for (std::size_t i = 1; i < v.size(); ++i) {
        v[i] = v[0] + delta * (v[i] - v[0]);
        fv[i] = eval(v[i]);
      }
    }
  }
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (fv[i] < out.value) {
      out.value = fv[i];
      out.x = v[i];
    }
  }
  return out;
}

}  // namespace gridbo
