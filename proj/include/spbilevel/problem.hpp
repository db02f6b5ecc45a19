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

#include <functional>

#include "spbilevel/types.hpp"

namespace spb {

/// Dimensions of the outer min variable x, the max variable y and the
/// lower-level variable theta.
struct Dims {
  Index n_x = 0;
  Index d_y = 0;
  Index m_theta = 0;

  void validate() const;
};

/// Curvature constants of the lower level plus the curvature of the upper
/// level in y. Only these enter executable formulas (step sizes, rates).
struct SmoothnessConstants {
  double mu_g = 1.0;
  double L_g = 1.0;
  bool linear_in_y = false;
  double L_yy_phi = 0.0;

  double kappa_g() const { return L_g / mu_g; }
  void validate() const;
};

/// Oracle bundle for
///
///   min_{x in X} max_{y in Y} Phi(x, theta*(x), y),
///   theta*(x) = argmin_theta g(x, theta),
///
/// with g(x, .) strongly convex. Each slot is a separate callable because the
/// solvers use different subsets per update. The mixed derivative of g is only
/// ever exposed as the product grad^2_{theta x} g * v, an n_x-vector.
///
/// Oracles must be pure: identical inputs give bit-identical outputs, and a
/// problem is safe to share read-only across threads.
struct SpBilevelProblem {
  using ValueUpper = std::function<double(const Vec& x, const Vec& theta, const Vec& y)>;
  using GradUpper = std::function<Vec(const Vec& x, const Vec& theta, const Vec& y)>;
  using ValueLower = std::function<double(const Vec& x, const Vec& theta)>;
  using GradLower = std::function<Vec(const Vec& x, const Vec& theta)>;
  using ProductLower = std::function<Vec(const Vec& x, const Vec& theta, const Vec& v)>;

  Dims dims;
  ValueUpper phi;
  GradUpper grad_phi_x;
  GradUpper grad_phi_theta;
  GradUpper grad_phi_y;
  ValueLower g_val;
  GradLower grad_g_theta;
  ProductLower hvp_g_thetatheta;  // grad^2_{theta theta} g(x, theta) * v, v in R^m
  ProductLower jvp_g_thetax;      // grad^2_{theta x} g(x, theta) * v, result in R^n
  SmoothnessConstants constants;

  /// Throws ContractError if a slot is empty or the constants are invalid.
  void validate() const;
};

// Checked oracle calls: dimension contracts on the inputs, and a
// NonFiniteError naming the oracle if the output is not finite.
double eval_phi(const SpBilevelProblem& p, const Vec& x, const Vec& theta, const Vec& y);
Vec eval_grad_phi_x(const SpBilevelProblem& p, const Vec& x, const Vec& theta, const Vec& y);
Vec eval_grad_phi_theta(const SpBilevelProblem& p, const Vec& x, const Vec& theta, const Vec& y);
Vec eval_grad_phi_y(const SpBilevelProblem& p, const Vec& x, const Vec& theta, const Vec& y);
double eval_g(const SpBilevelProblem& p, const Vec& x, const Vec& theta);
Vec eval_grad_g_theta(const SpBilevelProblem& p, const Vec& x, const Vec& theta);
Vec eval_hvp(const SpBilevelProblem& p, const Vec& x, const Vec& theta, const Vec& v);
Vec eval_jvp_thetax(const SpBilevelProblem& p, const Vec& x, const Vec& theta, const Vec& v);

}  // namespace spb
