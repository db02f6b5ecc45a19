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

#include "spbilevel/derivative_check.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <iomanip>
#include <sstream>

#include "spbilevel/rng.hpp"

namespace spb {

bool CheckReport::passed() const {
  return std::all_of(entries.begin(), entries.end(), [](const CheckEntry& e) { return e.passed; });
}

const CheckEntry* CheckReport::find(const std::string& name) const {
  for (const auto& e : entries)
    if (e.name == name) return &e;
  return nullptr;
}

std::string CheckReport::table() const {
  std::ostringstream out;
  for (const auto& e : entries) {
    out << std::left << std::setw(28) << e.name << std::right << std::scientific
        << std::setprecision(3) << std::setw(12) << e.max_error << "  tol " << std::setw(10)
        << e.tolerance << "  " << (e.passed ? "PASS" : "FAIL") << '\n';
  }
  return out.str();
}

namespace {

double rel_error(double a, double b) {
  return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

double rel_error(const Vec& a, const Vec& b) {
  return (a - b).norm() / std::max({1.0, a.norm(), b.norm()});
}

void validate_h(double h) {
  if (!(h > 0.0 && h <= 1e-3)) throw ContractError("finite-difference step h must be in (0, 1e-3]");
}

CheckEntry entry(std::string name, double err, double tol) {
  return CheckEntry{std::move(name), err, tol, err <= tol};
}

bool bit_equal(const Vec& a, const Vec& b) {
  return a.size() == b.size() &&
         std::memcmp(a.data(), b.data(), sizeof(double) * static_cast<std::size_t>(a.size())) == 0;
}

}  // namespace

CheckReport check_gradients(const SpBilevelProblem& problem, const Vec& x, const Vec& theta,
                            const Vec& y, const CheckOptions& options) {
  validate_h(options.h);
  require_dim(x, problem.dims.n_x, "x");
  require_dim(theta, problem.dims.m_theta, "theta");
  require_dim(y, problem.dims.d_y, "y");

  const double h = options.h;
  Rng rng(options.seed);
  CheckReport report;

  const Vec gx = eval_grad_phi_x(problem, x, theta, y);
  const Vec gt = eval_grad_phi_theta(problem, x, theta, y);
  const Vec gy = eval_grad_phi_y(problem, x, theta, y);
  const Vec gg = eval_grad_g_theta(problem, x, theta);

  double ex = 0.0, et = 0.0, ey = 0.0, eg = 0.0;
  for (int k = 0; k < options.num_directions; ++k) {
    const Vec ux = rng.unit_vector(problem.dims.n_x);
    const Vec ut = rng.unit_vector(problem.dims.m_theta);
    const Vec uy = rng.unit_vector(problem.dims.d_y);

    const double fdx =
        (eval_phi(problem, x + h * ux, theta, y) - eval_phi(problem, x - h * ux, theta, y)) /
        (2 * h);
    const double fdt =
        (eval_phi(problem, x, theta + h * ut, y) - eval_phi(problem, x, theta - h * ut, y)) /
        (2 * h);
    const double fdy =
        (eval_phi(problem, x, theta, y + h * uy) - eval_phi(problem, x, theta, y - h * uy)) /
        (2 * h);
    const double fdg =
        (eval_g(problem, x, theta + h * ut) - eval_g(problem, x, theta - h * ut)) / (2 * h);

    ex = std::max(ex, rel_error(fdx, gx.dot(ux)));
    et = std::max(et, rel_error(fdt, gt.dot(ut)));
    ey = std::max(ey, rel_error(fdy, gy.dot(uy)));
    eg = std::max(eg, rel_error(fdg, gg.dot(ut)));
  }
  report.entries.push_back(entry("grad_phi_x", ex, options.tolerance));
  report.entries.push_back(entry("grad_phi_theta", et, options.tolerance));
  report.entries.push_back(entry("grad_phi_y", ey, options.tolerance));
  report.entries.push_back(entry("grad_g_theta", eg, options.tolerance));

  const bool pure = bit_equal(gx, eval_grad_phi_x(problem, x, theta, y)) &&
                    bit_equal(gt, eval_grad_phi_theta(problem, x, theta, y)) &&
                    bit_equal(gy, eval_grad_phi_y(problem, x, theta, y)) &&
                    bit_equal(gg, eval_grad_g_theta(problem, x, theta));
  report.entries.push_back(CheckEntry{"gradient_purity", pure ? 0.0 : 1.0, 0.0, pure});
  return report;
}

CheckReport check_hvp(const SpBilevelProblem& problem, const Vec& x, const Vec& theta,
                      const CheckOptions& options) {
  validate_h(options.h);
  require_dim(x, problem.dims.n_x, "x");
  require_dim(theta, problem.dims.m_theta, "theta");

  const double h = options.h;
  const Index m = problem.dims.m_theta;
  const Index n = problem.dims.n_x;
  const auto& c = problem.constants;
  Rng rng(options.seed ^ 0x9e3779b97f4a7c15ULL);
  CheckReport report;

  double e_hvp = 0.0, e_jvp = 0.0, e_lin = 0.0, e_sym = 0.0, e_lo = 0.0, e_hi = 0.0;
  bool pure = true;
  for (int k = 0; k < options.num_directions; ++k) {
    const Vec v = rng.normal_vector(m);
    const Vec w = rng.normal_vector(m);
    const double a = rng.normal();
    const double b = rng.normal();

    const Vec hv = eval_hvp(problem, x, theta, v);
    const Vec hw = eval_hvp(problem, x, theta, w);
    pure = pure && bit_equal(hv, eval_hvp(problem, x, theta, v));

    const Vec fd = (eval_grad_g_theta(problem, x, theta + h * v) -
                    eval_grad_g_theta(problem, x, theta - h * v)) /
                   (2 * h);
    e_hvp = std::max(e_hvp, rel_error(fd, hv));

    // grad^2_{theta x} g * v, column j = d/dx_j <grad_theta g, v>
    const Vec jv = eval_jvp_thetax(problem, x, theta, v);
    pure = pure && bit_equal(jv, eval_jvp_thetax(problem, x, theta, v));
    Vec fd_j(n);
    for (Index j = 0; j < n; ++j) {
      Vec xp = x, xm = x;
      xp[j] += h;
      xm[j] -= h;
      fd_j[j] = v.dot(eval_grad_g_theta(problem, xp, theta) - eval_grad_g_theta(problem, xm, theta)) /
                (2 * h);
    }
    e_jvp = std::max(e_jvp, rel_error(fd_j, jv));

    const Vec lhs = eval_hvp(problem, x, theta, a * v + b * w);
    const Vec rhs = a * hv + b * hw;
    e_lin = std::max(e_lin, (lhs - rhs).norm() / std::max({1e-300, lhs.norm(), rhs.norm()}));

    const double uhw = v.dot(hw);
    const double whu = w.dot(hv);
    e_sym = std::max(e_sym, std::abs(uhw - whu) / std::max({1e-300, std::abs(uhw), std::abs(whu)}));

    // curvature bounds: violation measured relative to ||v||^2
    const double vv = v.squaredNorm();
    const double vhv = v.dot(hv);
    e_lo = std::max(e_lo, std::max(0.0, c.mu_g * vv - vhv) / vv);
    e_hi = std::max(e_hi, std::max(0.0, vhv - c.L_g * vv) / vv);
  }

  const Vec zero_out = eval_hvp(problem, x, theta, Vec::Zero(m));

  report.entries.push_back(entry("hvp_g_thetatheta", e_hvp, options.tolerance));
  report.entries.push_back(entry("jvp_g_thetax", e_jvp, options.tolerance));
  report.entries.push_back(entry("hvp_linearity", e_lin, 1e-10));
  report.entries.push_back(entry("hvp_symmetry", e_sym, 1e-10));
  report.entries.push_back(entry("hvp_zero", zero_out.norm(), 0.0));
  report.entries.push_back(entry("coercivity_mu_g", e_lo, 1e-10 * std::max(1.0, c.mu_g)));
  report.entries.push_back(entry("upper_bound_L_g", e_hi, 1e-10 * std::max(1.0, c.L_g)));
  report.entries.push_back(CheckEntry{"hvp_purity", pure ? 0.0 : 1.0, 0.0, pure});
  return report;
}

}  // namespace spb
