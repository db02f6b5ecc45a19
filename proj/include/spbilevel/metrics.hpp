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
#include <optional>
#include <string>

#include "spbilevel/problem.hpp"
#include "spbilevel/sets.hpp"

namespace spb {

struct InnerSolveOptions {
  double tol = 1e-9;
  std::int64_t max_iter = 200000;
};

struct InnerSolveResult {
  Vec solution;
  double residual = 0.0;
  std::int64_t iterations = 0;
};

/// Gradient descent on g(x, .) with step 2/(mu_g + L_g) until
/// ||grad_theta g|| <= tol. Starts from `start` or zero. Throws
/// ToleranceNotMetError (carrying the last iterate) when max_iter runs out.
InnerSolveResult solve_lower(const SpBilevelProblem& problem, const Vec& x,
                             const InnerSolveOptions& options = {},
                             const std::optional<Vec>& start = std::nullopt);

/// Matrix-free conjugate gradient for H(x, theta*) v = grad_theta Phi(x, theta*, y)
/// using only hvp_g_thetatheta. Throws CoercivityError on non-positive
/// curvature and ToleranceNotMetError when max_iter runs out.
InnerSolveResult solve_adjoint(const SpBilevelProblem& problem, const Vec& x, const Vec& theta_star,
                               const Vec& y, const InnerSolveOptions& options = {});

/// Exact (to tolerance) implicit partial gradients of L(x, y) = Phi(x, theta*(x), y).
struct ImplicitGradients {
  Vec theta_star;
  Vec v;       // adjoint: H^{-1} grad_theta Phi
  Vec grad_x;  // grad_x Phi - J_{theta x} v
  Vec grad_y;  // grad_y Phi
  double lower_residual = 0.0;
  double adjoint_residual = 0.0;
};

struct GradientOptions {
  InnerSolveOptions lower;
  InnerSolveOptions adjoint;
  std::optional<Vec> theta_start;  // warm start for the lower solve
  /// Return the last iterates instead of throwing when an inner solve runs
  /// out of iterations; the residual fields then exceed the tolerance.
  bool accept_inexact = false;
};

ImplicitGradients implicit_gradients(const SpBilevelProblem& problem, const Vec& x, const Vec& y,
                                     const GradientOptions& options = {});

enum class GapMode { kLmo, kProj };

std::string to_string(GapMode mode);

/// sup_{s in X} <grad_x L, x - s>, clamped at 0.
double gap_x_lmo(const SetSpec& set_x, const ImplicitGradients& grads, const Vec& x);

/// ||x - P_X(x - tau grad_x L)|| / tau.
double gap_x_proj(const SetSpec& set_x, const ImplicitGradients& grads, const Vec& x, double tau);

/// ||y - P_Y(y + sigma grad_y L)|| / sigma.
double gap_y(const SetSpec& set_y, const ImplicitGradients& grads, const Vec& y, double sigma);

struct GapReport {
  double gap_x = 0.0;
  double gap_y = 0.0;
  double gap_z = 0.0;  // gap_x + gap_y
  GapMode mode = GapMode::kLmo;
  double sigma_used = 0.0;
  std::optional<double> tau_used;
  double lower_residual = 0.0;
  double adjoint_residual = 0.0;
  bool stale = false;  // an inner solve missed its tolerance
  Vec theta_star;      // for warm starts

  /// epsilon-stationarity: gap_z <= epsilon.
  bool is_stationary(double epsilon) const { return gap_z <= epsilon; }
};

struct GapOptions {
  GapMode mode = GapMode::kLmo;
  double sigma = 1.0;
  double tau = 1.0;  // PROJ mode only
  GradientOptions gradients;
};

GapReport gap_report(const SpBilevelProblem& problem, const SetSpec& set_x, const SetSpec& set_y,
                     const Vec& x, const Vec& y, const GapOptions& options);

}  // namespace spb
