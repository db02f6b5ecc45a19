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

#include "spbilevel/problem.hpp"
#include "spbilevel/sets.hpp"

namespace spb::bench {

/// Phi(x, theta, y) = 1/2 x'Px + x'M theta + y'(R theta + N x)
/// g(x, theta)      = 1/2 theta'H theta - theta'S x
///
/// Every quantity the solvers and metrics approximate has a dense closed form
/// here, which makes this instance the reference for the verification tests.
struct ToyOptions {
  std::uint64_t seed = 7;
  Index n_x = 4;
  Index m_theta = 3;
  Index d_y = 3;
  double mu_g = 1.0;  // smallest eigenvalue of H
  double L_g = 5.0;   // largest eigenvalue of H
  bool zero_coupling = false;  // S = 0
  double radius_x = 5.0;
};

struct ToyClosedForms {
  Mat P, M, R, N, H, S;
  Vec h_eigenvalues;

  Vec theta_star(const Vec& x) const;           // H^{-1} S x
  Vec adjoint(const Vec& x, const Vec& y) const;  // H^{-1} (M'x + R'y)
  Vec grad_x(const Vec& x, const Vec& y) const;   // P x + M theta* + N'y + S'v
  Vec grad_y(const Vec& x) const;                 // R theta* + N x
};

struct ToyQuadratic {
  SpBilevelProblem problem;
  SetSpec set_x;  // Ball2(0, radius_x)
  SetSpec set_y;  // Simplex(d_y)
  ToyClosedForms closed;
};

ToyQuadratic toy_quadratic(const ToyOptions& options);
ToyQuadratic toy_quadratic(std::uint64_t seed, Index n_x = 4, Index m_theta = 3, Index d_y = 3);

/// A point with grad_x L(x*, y*) = 0, grad_y L(x*) constant across
/// coordinates, y* in the relative interior of the simplex and x* inside
/// the ball: stationary for both gap definitions. Obtained from the dense
/// KKT system; nullopt if that solution is infeasible for this instance.
struct ToySaddle {
  Vec x;
  Vec y;
};
std::optional<ToySaddle> toy_saddle(const ToyQuadratic& toy);

}  // namespace spb::bench
