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

#ifndef GRIDBO_ERRORS_HPP_
#define GRIDBO_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace gridbo {

/// Base class of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Matrix or channel dimensions do not fit together.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// A system that must be Hurwitz is not.
class StabilityError : public Error {
 public:
  using Error::Error;
};

/// (i*omega*I - A) is numerically singular at the requested frequency.
class ResonanceError : public Error {
 public:
  explicit ResonanceError(double omega)
      : Error("resonance: i*omega*I - A is singular at omega = " + std::to_string(omega)),
        omega_(omega) {}
  double omega() const noexcept { return omega_; }

 private:
  double omega_;
};

/// A feedback interconnection has a singular algebraic loop.
class WellPosednessError : public Error {
 public:
  using Error::Error;
};

/// A grid point component lies outside its block interval.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Eigenvalue iteration or a linear solve failed.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// A Gram or distance matrix is too ill-conditioned to factorize.
class ConditioningError : public Error {
 public:
  using Error::Error;
};

/// Infinite H2 norm requested (non-zero feedthrough).
class InfiniteNormError : public Error {
 public:
  using Error::Error;
};

/// No stabilizing controller was found within the evaluation budget.
class SynthesisError : public Error {
 public:
  explicit SynthesisError(double best_abscissa)
      : Error("synthesis failed: best closed-loop spectral abscissa " + std::to_string(best_abscissa)),
        best_abscissa_(best_abscissa) {}
  double best_abscissa() const noexcept { return best_abscissa_; }

 private:
  double best_abscissa_;
};

/// Malformed configuration or input file.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace gridbo

#endif  // GRIDBO_ERRORS_HPP_
