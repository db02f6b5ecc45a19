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

#include "spbilevel/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace spb {

std::string to_string(GapMode mode) { return mode == GapMode::kLmo ? "lmo" : "proj"; }

namespace {

void require_tol(const InnerSolveOptions& o) {
  if (!(o.tol > 0.0)) throw ContractError("inner solve tolerance must be positive");
  if (o.max_iter < 0) throw ContractError("inner solve max_iter must be nonnegative");
}

}  // namespace

InnerSolveResult solve_lower(const SpBilevelProblem& problem, const Vec& x,
                             const InnerSolveOptions& options, const std::optional<Vec>& start) {
  require_tol(options);
  require_dim(x, problem.dims.n_x, "x");
  const double step = 2.0 / (problem.constants.mu_g + problem.constants.L_g);

  InnerSolveResult out;
  out.solution = start ? *start : Vec::Zero(problem.dims.m_theta);
  require_dim(out.solution, problem.dims.m_theta, "theta start");

  Vec grad = eval_grad_g_theta(problem, x, out.solution);
  out.residual = grad.norm();
  while (out.residual > options.tol) {
    if (out.iterations >= options.max_iter) {
      throw ToleranceNotMetError("solve_lower", out.residual, out.solution);
    }
    out.solution -= step * grad;
    grad = eval_grad_g_theta(problem, x, out.solution);
    out.residual = grad.norm();
    ++out.iterations;
  }
  return out;
}

InnerSolveResult solve_adjoint(const SpBilevelProblem& problem, const Vec& x, const Vec& theta_star,
                               const Vec& y, const InnerSolveOptions& options) {
  require_tol(options);
  const Vec rhs = eval_grad_phi_theta(problem, x, theta_star, y);
  const auto apply = [&](const Vec& v) { return eval_hvp(problem, x, theta_star, v); };

  InnerSolveResult out;
  out.solution = Vec::Zero(problem.dims.m_theta);
  Vec r = rhs;
  out.residual = r.norm();

  // Restart from the true residual whenever the recursive one has converged,
  // so the reported residual is ||H v - b|| and not the CG estimate.
  while (out.residual > options.tol) {
    Vec p = r;
    double rr = r.squaredNorm();
    while (true) {
      if (out.iterations >= options.max_iter) {
        throw ToleranceNotMetError("solve_adjoint", out.residual, out.solution);
      }
      const Vec hp = apply(p);
      const double curvature = p.dot(hp);
      if (!(curvature > 0.0)) {
        throw CoercivityError("solve_adjoint: non-positive curvature " + std::to_string(curvature) +
                              " in the lower-level Hessian");
      }
      const double step = rr / curvature;
      out.solution += step * p;
      r -= step * hp;
      ++out.iterations;
      const double rr_next = r.squaredNorm();
      if (std::sqrt(rr_next) <= options.tol) break;
      p = r + (rr_next / rr) * p;
      rr = rr_next;
    }
    r = rhs - apply(out.solution);
    out.residual = r.norm();
  }
  return out;
}

ImplicitGradients implicit_gradients(const SpBilevelProblem& problem, const Vec& x, const Vec& y,
                                     const GradientOptions& options) {
  require_dim(y, problem.dims.d_y, "y");
  ImplicitGradients g;
  try {
    auto lower = solve_lower(problem, x, options.lower, options.theta_start);
    g.theta_star = std::move(lower.solution);
    g.lower_residual = lower.residual;
  } catch (const ToleranceNotMetError& e) {
    if (!options.accept_inexact) throw;
    g.theta_star = e.iterate();
    g.lower_residual = e.residual();
  }
  try {
    auto adjoint = solve_adjoint(problem, x, g.theta_star, y, options.adjoint);
    g.v = std::move(adjoint.solution);
    g.adjoint_residual = adjoint.residual;
  } catch (const ToleranceNotMetError& e) {
    if (!options.accept_inexact) throw;
    g.v = e.iterate();
    g.adjoint_residual = e.residual();
  }
  g.grad_x = eval_grad_phi_x(problem, x, g.theta_star, y) - eval_jvp_thetax(problem, x, g.theta_star, g.v);
  g.grad_y = eval_grad_phi_y(problem, x, g.theta_star, y);
  return g;
}

double gap_x_lmo(const SetSpec& set_x, const ImplicitGradients& grads, const Vec& x) {
  require_dim(x, set_x.dim(), "x");
  const Vec s = set_x.lmo(grads.grad_x);
  return std::max(0.0, grads.grad_x.dot(x - s));
}

double gap_x_proj(const SetSpec& set_x, const ImplicitGradients& grads, const Vec& x, double tau) {
  if (!(tau > 0.0)) throw ContractError("gap_x_proj: tau must be positive");
  require_dim(x, set_x.dim(), "x");
  return (x - set_x.project(x - tau * grads.grad_x)).norm() / tau;
}

double gap_y(const SetSpec& set_y, const ImplicitGradients& grads, const Vec& y, double sigma) {
  if (!(sigma > 0.0)) throw ContractError("gap_y: sigma must be positive");
  require_dim(y, set_y.dim(), "y");
  return (y - set_y.project(y + sigma * grads.grad_y)).norm() / sigma;
}

GapReport gap_report(const SpBilevelProblem& problem, const SetSpec& set_x, const SetSpec& set_y,
                     const Vec& x, const Vec& y, const GapOptions& options) {
  const ImplicitGradients grads = implicit_gradients(problem, x, y, options.gradients);
  GapReport report;
  report.mode = options.mode;
  report.sigma_used = options.sigma;
  if (options.mode == GapMode::kLmo) {
    report.gap_x = gap_x_lmo(set_x, grads, x);
  } else {
    report.gap_x = gap_x_proj(set_x, grads, x, options.tau);
    report.tau_used = options.tau;
  }
  report.gap_y = gap_y(set_y, grads, y, options.sigma);
  report.gap_z = report.gap_x + report.gap_y;
  report.lower_residual = grads.lower_residual;
  report.adjoint_residual = grads.adjoint_residual;
  report.stale = grads.lower_residual > options.gradients.lower.tol ||
                 grads.adjoint_residual > options.gradients.adjoint.tol;
  report.theta_star = grads.theta_star;
  return report;
}

}  // namespace spb
