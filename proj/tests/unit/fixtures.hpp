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

#include <cmath>

#include "spbilevel/problem.hpp"
#include "spbilevel/rng.hpp"
#include "spbilevel/sets.hpp"

namespace spb::testing {

/// Phi = 0.5 |x|^2 + <a, theta> + <y, B theta>,  g = 0.5 |theta - x|^2.
/// n_x = m_theta = n; mu_g = L_g = 1; theta*(x) = x.
inline SpBilevelProblem tracking_problem(Index n, Index d, std::uint64_t seed = 3) {
  Rng rng(seed);
  const Vec a = rng.normal_vector(n);
  const Mat B = rng.normal_matrix(d, n);
  SpBilevelProblem p;
  p.dims = {n, d, n};
  p.phi = [a, B](const Vec& x, const Vec& t, const Vec& y) { return 0.5 * x.squaredNorm() + a.dot(t) + y.dot(B * t); };
  p.grad_phi_x = [](const Vec& x, const Vec&, const Vec&) -> Vec { return x; };
  p.grad_phi_theta = [a, B](const Vec&, const Vec&, const Vec& y) -> Vec { return a + B.transpose() * y; };
  p.grad_phi_y = [B](const Vec&, const Vec& t, const Vec&) -> Vec { return B * t; };
  p.g_val = [](const Vec& x, const Vec& t) { return 0.5 * (t - x).squaredNorm(); };
  p.grad_g_theta = [](const Vec& x, const Vec& t) -> Vec { return t - x; };
  p.hvp_g_thetatheta = [](const Vec&, const Vec&, const Vec& v) -> Vec { return v; };
  p.jvp_g_thetax = [](const Vec&, const Vec&, const Vec& v) -> Vec { return -v; };
  p.constants = {1.0, 1.0, true, 0.0};
  return p;
}

/// Phi = <c, x> + <y, e> |x|^2 (independent of theta), g = 0.5 |theta|^2.
inline SpBilevelProblem decoupled_problem(Index n, Index m, Index d) {
  const Vec c = Vec::LinSpaced(n, 1.0, 2.0);
  SpBilevelProblem p;
  p.dims = {n, d, m};
  p.phi = [c](const Vec& x, const Vec&, const Vec& y) { return c.dot(x) + y.sum() * x.squaredNorm(); };
  p.grad_phi_x = [c](const Vec& x, const Vec&, const Vec& y) -> Vec { return c + 2.0 * y.sum() * x; };
  p.grad_phi_theta = [m](const Vec&, const Vec&, const Vec&) -> Vec { return Vec::Zero(m); };
  p.grad_phi_y = [d](const Vec& x, const Vec&, const Vec&) -> Vec { return Vec::Constant(d, x.squaredNorm()); };
  p.g_val = [](const Vec&, const Vec& t) { return 0.5 * t.squaredNorm(); };
  p.grad_g_theta = [](const Vec&, const Vec& t) -> Vec { return t; };
  p.hvp_g_thetatheta = [](const Vec&, const Vec&, const Vec& v) -> Vec { return v; };
  p.jvp_g_thetax = [n](const Vec&, const Vec&, const Vec&) -> Vec { return Vec::Zero(n); };
  p.constants = {1.0, 1.0, true, 0.0};
  return p;
}

/// g = 0.5 theta' diag(h) theta - <theta, x>; Phi = <1, theta> + <y, x>.
inline SpBilevelProblem diagonal_problem(const Vec& h) {
  const Index m = h.size();
  SpBilevelProblem p;
  p.dims = {m, m, m};
  p.phi = [](const Vec& x, const Vec& t, const Vec& y) { return t.sum() + y.dot(x); };
  p.grad_phi_x = [](const Vec&, const Vec&, const Vec& y) -> Vec { return y; };
  p.grad_phi_theta = [m](const Vec&, const Vec&, const Vec&) -> Vec { return Vec::Ones(m); };
  p.grad_phi_y = [](const Vec& x, const Vec&, const Vec&) -> Vec { return x; };
  p.g_val = [h](const Vec& x, const Vec& t) { return 0.5 * t.dot(h.cwiseProduct(t)) - t.dot(x); };
  p.grad_g_theta = [h](const Vec& x, const Vec& t) -> Vec { return h.cwiseProduct(t) - x; };
  p.hvp_g_thetatheta = [h](const Vec&, const Vec&, const Vec& v) -> Vec { return h.cwiseProduct(v); };
  p.jvp_g_thetax = [](const Vec&, const Vec&, const Vec& v) -> Vec { return -v; };
  p.constants = {h.minCoeff(), h.maxCoeff(), true, 0.0};
  return p;
}

/// Uniform-ish random feasible point: projection of a scaled Gaussian.
inline Vec random_feasible(const SetSpec& set, Rng& rng, double scale = 2.0) {
  return set.project(scale * rng.normal_vector(set.dim()));
}

}  // namespace spb::testing
