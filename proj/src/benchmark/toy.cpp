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

#include "spbilevel/benchmark/toy.hpp"

#include <memory>

#include <Eigen/LU>
#include <Eigen/QR>

#include "spbilevel/rng.hpp"

namespace spb::bench {

Vec ToyClosedForms::theta_star(const Vec& x) const { return H.ldlt().solve(S * x); }

Vec ToyClosedForms::adjoint(const Vec& x, const Vec& y) const {
  return H.ldlt().solve(M.transpose() * x + R.transpose() * y);
}

Vec ToyClosedForms::grad_x(const Vec& x, const Vec& y) const {
  return P * x + M * theta_star(x) + N.transpose() * y + S.transpose() * adjoint(x, y);
}

Vec ToyClosedForms::grad_y(const Vec& x) const { return R * theta_star(x) + N * x; }

ToyQuadratic toy_quadratic(std::uint64_t seed, Index n_x, Index m_theta, Index d_y) {
  ToyOptions o;
  o.seed = seed;
  o.n_x = n_x;
  o.m_theta = m_theta;
  o.d_y = d_y;
  return toy_quadratic(o);
}

ToyQuadratic toy_quadratic(const ToyOptions& o) {
  Dims{o.n_x, o.d_y, o.m_theta}.validate();
  if (!(o.mu_g > 0.0 && o.L_g >= o.mu_g)) throw ContractError("toy_quadratic: need 0 < mu_g <= L_g");
  const Index n = o.n_x, m = o.m_theta, d = o.d_y;
  Rng rng(o.seed);

  auto closed = std::make_shared<ToyClosedForms>();
  auto& c = *closed;
  const Mat B = rng.normal_matrix(n, n);
  c.P = B.transpose() * B / static_cast<double>(n);
  c.M = rng.normal_matrix(n, m) / std::sqrt(static_cast<double>(m));
  c.R = rng.normal_matrix(d, m) / std::sqrt(static_cast<double>(m));
  c.N = rng.normal_matrix(d, n) / std::sqrt(static_cast<double>(n));
  c.S = o.zero_coupling ? Mat::Zero(m, n) : Mat(rng.normal_matrix(m, n) / std::sqrt(static_cast<double>(n)));

  // H = Q diag(eig) Q' with eigenvalues spread evenly over [mu_g, L_g]
  const Mat Q = Eigen::HouseholderQR<Mat>(rng.normal_matrix(m, m)).householderQ();
  c.h_eigenvalues.resize(m);
  for (Index i = 0; i < m; ++i) {
    c.h_eigenvalues[i] = m == 1 ? o.mu_g : o.mu_g + (o.L_g - o.mu_g) * static_cast<double>(i) / static_cast<double>(m - 1);
  }
  c.H = Q * c.h_eigenvalues.asDiagonal() * Q.transpose();
  c.H = 0.5 * (c.H + c.H.transpose());

  ToyQuadratic toy{SpBilevelProblem{}, SetSpec::ball2(Vec::Zero(n), o.radius_x), SetSpec::simplex(d), c};
  auto& p = toy.problem;
  p.dims = Dims{n, d, m};
  p.constants = SmoothnessConstants{o.mu_g, o.L_g, true, 0.0};

  p.phi = [closed](const Vec& x, const Vec& theta, const Vec& y) {
    const auto& k = *closed;
    return 0.5 * x.dot(k.P * x) + x.dot(k.M * theta) + y.dot(k.R * theta + k.N * x);
  };
  p.grad_phi_x = [closed](const Vec& x, const Vec& theta, const Vec& y) -> Vec {
    const auto& k = *closed;
    return k.P * x + k.M * theta + k.N.transpose() * y;
  };
  p.grad_phi_theta = [closed](const Vec& x, const Vec&, const Vec& y) -> Vec {
    const auto& k = *closed;
    return k.M.transpose() * x + k.R.transpose() * y;
  };
  p.grad_phi_y = [closed](const Vec& x, const Vec& theta, const Vec&) -> Vec {
    const auto& k = *closed;
    return k.R * theta + k.N * x;
  };
  p.g_val = [closed](const Vec& x, const Vec& theta) {
    const auto& k = *closed;
    return 0.5 * theta.dot(k.H * theta) - theta.dot(k.S * x);
  };
  p.grad_g_theta = [closed](const Vec& x, const Vec& theta) -> Vec {
    const auto& k = *closed;
    return k.H * theta - k.S * x;
  };
  p.hvp_g_thetatheta = [closed](const Vec&, const Vec&, const Vec& v) -> Vec { return closed->H * v; };
  p.jvp_g_thetax = [closed](const Vec&, const Vec&, const Vec& v) -> Vec {
    return -(closed->S.transpose() * v);
  };
  return toy;
}

std::optional<ToySaddle> toy_saddle(const ToyQuadratic& toy) {
  const auto& c = toy.closed;
  const Index n = c.P.rows();
  const Index d = c.R.rows();
  const Mat Hinv = c.H.inverse();
  // L(x, y) = 1/2 x'Qx + y'Bx with
  const Mat MHS = c.M * Hinv * c.S;
  const Mat Qm = c.P + MHS + MHS.transpose();
  const Mat Bm = c.R * Hinv * c.S + c.N;

  // unknowns (x, y, t): Q x + B'y = 0, B x - t 1 = 0, 1'y = 1
  const Index dim = n + d + 1;
  Mat K = Mat::Zero(dim, dim);
  Vec rhs = Vec::Zero(dim);
  K.block(0, 0, n, n) = Qm;
  K.block(0, n, n, d) = Bm.transpose();
  K.block(n, 0, d, n) = Bm;
  K.block(n, n + d, d, 1) = -Vec::Ones(d);
  K.block(n + d, n, 1, d) = Vec::Ones(d).transpose();
  rhs[n + d] = 1.0;

  const Eigen::FullPivLU<Mat> lu(K);
  if (!lu.isInvertible()) return std::nullopt;
  const Vec sol = lu.solve(rhs);
  ToySaddle s{sol.head(n), sol.segment(n, d)};
  if ((s.y.array() <= 1e-6).any()) return std::nullopt;
  if (s.x.norm() >= 0.99 * std::get<Ball2>(toy.set_x.variant()).radius) return std::nullopt;
  return s;
}

}  // namespace spb::bench
