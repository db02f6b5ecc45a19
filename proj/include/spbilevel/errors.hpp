// Copyright 2026 The spbilevel Authors
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

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>

#include <Eigen/Core>

namespace spb {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller violated a documented precondition (dimensions, ranges, signs).
class ContractError : public Error {
 public:
  using Error::Error;
};

/// Invalid solver or run configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// An oracle returned NaN or Inf.
class NonFiniteError : public Error {
 public:
  explicit NonFiniteError(std::string oracle)
      : Error("oracle '" + oracle + "' returned a non-finite value"), oracle_(std::move(oracle)) {}
  const std::string& oracle() const noexcept { return oracle_; }

 private:
  std::string oracle_;
};

/// A solver iterate became non-finite or exceeded the divergence bound.
class DivergenceError : public Error {
 public:
  DivergenceError(std::int64_t iteration, std::string quantity)
      : Error("divergence at iteration " + std::to_string(iteration) + " in '" + quantity + "'"),
        iteration_(iteration),
        quantity_(std::move(quantity)) {}
  std::int64_t iteration() const noexcept { return iteration_; }
  const std::string& quantity() const noexcept { return quantity_; }

 private:
  std::int64_t iteration_;
  std::string quantity_;
};

/// An inner iterative solve ran out of iterations. Carries the last iterate so
/// the caller can decide whether to accept it.
class ToleranceNotMetError : public Error {
 public:
  ToleranceNotMetError(std::string what, double residual, Eigen::VectorXd iterate)
      : Error(what + " did not reach tolerance (residual " + std::to_string(residual) + ")"),
        residual_(residual),
        iterate_(std::move(iterate)) {}
  double residual() const noexcept { return residual_; }
  const Eigen::VectorXd& iterate() const noexcept { return iterate_; }

 private:
  double residual_;
  Eigen::VectorXd iterate_;
};

/// The lower-level Hessian showed non-positive curvature, so the declared
/// strong-convexity modulus cannot hold.
class CoercivityError : public Error {
 public:
  using Error::Error;
};

/// Malformed input file (CSV, config, trace).
class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace spb
