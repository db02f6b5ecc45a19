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

#include "spbilevel/problem.hpp"

#include <cmath>

namespace spb {

void Dims::validate() const {
  if (n_x <= 0 || d_y <= 0 || m_theta <= 0) {
    throw ContractError("Dims: all dimensions must be positive (n_x=" + std::to_string(n_x) +
                        ", d_y=" + std::to_string(d_y) + ", m_theta=" + std::to_string(m_theta) +
                        ")");
  }
}

void SmoothnessConstants::validate() const {
  if (!(mu_g > 0.0) || !std::isfinite(mu_g)) throw ContractError("mu_g must be positive");
  if (!(L_g >= mu_g) || !std::isfinite(L_g)) throw ContractError("L_g must satisfy L_g >= mu_g");
  if (!(L_yy_phi >= 0.0)) throw ContractError("L_yy_phi must be nonnegative");
  if (linear_in_y && L_yy_phi != 0.0) {
    throw ContractError("linear_in_y requires L_yy_phi = 0");
  }
}

void SpBilevelProblem::validate() const {
  dims.validate();
  constants.validate();
  if (!phi || !grad_phi_x || !grad_phi_theta || !grad_phi_y || !g_val || !grad_g_theta ||
      !hvp_g_thetatheta || !jvp_g_thetax) {
    throw ContractError("SpBilevelProblem: every oracle slot must be set");
  }
}

namespace {

void require_xty(const SpBilevelProblem& p, const Vec& x, const Vec& theta, const Vec& y) {
  require_dim(x, p.dims.n_x, "x");
  require_dim(theta, p.dims.m_theta, "theta");
  require_dim(y, p.dims.d_y, "y");
}

void require_xt(const SpBilevelProblem& p, const Vec& x, const Vec& theta) {
  require_dim(x, p.dims.n_x, "x");
  require_dim(theta, p.dims.m_theta, "theta");
}

double finite(double value, const char* oracle) {
  if (!std::isfinite(value)) throw NonFiniteError(oracle);
  return value;
}

Vec finite(Vec value, Index expected, const char* oracle) {
  if (value.size() != expected) {
    throw ContractError(std::string("oracle '") + oracle + "' returned dimension " +
                        std::to_string(value.size()) + ", expected " + std::to_string(expected));
  }
  if (!value.allFinite()) throw NonFiniteError(oracle);
  return value;
}

}  // namespace

double eval_phi(const SpBilevelProblem& p, const Vec& x, const Vec& theta, const Vec& y) {
  require_xty(p, x, theta, y);
  return finite(p.phi(x, theta, y), "phi");
}

Vec eval_grad_phi_x(const SpBilevelProblem& p, const Vec& x, const Vec& theta, const Vec& y) {
  require_xty(p, x, theta, y);
  return finite(p.grad_phi_x(x, theta, y), p.dims.n_x, "grad_phi_x");
}

Vec eval_grad_phi_theta(const SpBilevelProblem& p, const Vec& x, const Vec& theta, const Vec& y) {
  require_xty(p, x, theta, y);
  return finite(p.grad_phi_theta(x, theta, y), p.dims.m_theta, "grad_phi_theta");
}

Vec eval_grad_phi_y(const SpBilevelProblem& p, const Vec& x, const Vec& theta, const Vec& y) {
  require_xty(p, x, theta, y);
  return finite(p.grad_phi_y(x, theta, y), p.dims.d_y, "grad_phi_y");
}

double eval_g(const SpBilevelProblem& p, const Vec& x, const Vec& theta) {
  require_xt(p, x, theta);
  return finite(p.g_val(x, theta), "g_val");
}

Vec eval_grad_g_theta(const SpBilevelProblem& p, const Vec& x, const Vec& theta) {
  require_xt(p, x, theta);
  return finite(p.grad_g_theta(x, theta), p.dims.m_theta, "grad_g_theta");
}

Vec eval_hvp(const SpBilevelProblem& p, const Vec& x, const Vec& theta, const Vec& v) {
  require_xt(p, x, theta);
  require_dim(v, p.dims.m_theta, "v");
  return finite(p.hvp_g_thetatheta(x, theta, v), p.dims.m_theta, "hvp_g_thetatheta");
}

Vec eval_jvp_thetax(const SpBilevelProblem& p, const Vec& x, const Vec& theta, const Vec& v) {
  require_xt(p, x, theta);
  require_dim(v, p.dims.m_theta, "v");
  return finite(p.jvp_g_thetax(x, theta, v), p.dims.n_x, "jvp_g_thetax");
}

}  // namespace spb
