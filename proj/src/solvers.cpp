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

#include "spbilevel/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace spb {

std::string to_string(Variant v) { return v == Variant::kOpf ? "opf" : "fp"; }

Variant parse_variant(const std::string& name) {
  if (name == "opf") return Variant::kOpf;
  if (name == "fp") return Variant::kFp;
  throw ConfigError("unknown solver variant '" + name + "' (valid: opf, fp)");
}

namespace {

constexpr double kBoundSlack = 1e-12;

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

void check_finite(const Vec& v, std::int64_t k, const char* name) {
  if (!v.allFinite() || v.lpNorm<Eigen::Infinity>() > kDivergenceBound) throw DivergenceError(k, name);
}

StepResult primal_dual_step(const SpBilevelProblem& problem, const SetSpec& set_x,
                            const SetSpec& set_y, const SolverConfig& cfg,
                            const IterateState& state, Variant variant) {
  const std::int64_t k = state.k;
  const Vec& x = state.x;
  const Vec& y = state.y;
  const Vec& theta = state.theta;
  try {
    StepResult out;
    StepDiagnostics& diag = out.diagnostics;

    // adjoint: one gradient step on 1/2 w'Hw - <grad_theta Phi, w>
    const Vec hw = eval_hvp(problem, x, theta, state.w);
    const Vec gphi_theta = eval_grad_phi_theta(problem, x, theta, y);
    Vec w_next = state.w - cfg.eta * (hw - gphi_theta);
    check_finite(w_next, k, "w");

    diag.g_x = eval_grad_phi_x(problem, x, theta, y) - eval_jvp_thetax(problem, x, theta, w_next);
    check_finite(diag.g_x, k, "G^x");
    diag.g_y = eval_grad_phi_y(problem, x, theta, y);
    check_finite(diag.g_y, k, "G^y");

    if (variant == Variant::kOpf) {
      diag.s = set_x.lmo(diag.g_x);
    } else {
      diag.s = set_x.project(x - cfg.tau * diag.g_x);
    }
    check_finite(diag.s, k, "s");

    Vec x_next = cfg.gamma * diag.s + (1.0 - cfg.gamma) * x;
    check_finite(x_next, k, "x");

    Vec theta_next = theta - cfg.alpha * eval_grad_g_theta(problem, x_next, theta);
    check_finite(theta_next, k, "theta");

    Vec y_next = set_y.project(y + cfg.sigma * (diag.g_y - cfg.mu * (y - cfg.y0)));
    check_finite(y_next, k, "y");

    diag.phi_surrogate = eval_phi(problem, x, theta, y);
    diag.step_norm_x = (x_next - x).norm();
    diag.step_norm_y = (y_next - y).norm();

    out.state.k = k + 1;
    out.state.x = std::move(x_next);
    out.state.y = std::move(y_next);
    out.state.theta = std::move(theta_next);
    out.state.w = std::move(w_next);
    return out;
  } catch (const NonFiniteError& e) {
    throw DivergenceError(k, e.oracle());
  }
}

}  // namespace

void SolverConfig::validate(const SpBilevelProblem& problem, const SetSpec& set_x,
                            const SetSpec& set_y) const {
  problem.validate();
  const auto& c = problem.constants;
  const auto& dims = problem.dims;
  require(set_x.dim() == dims.n_x, "set_x dimension does not match n_x");
  require(set_y.dim() == dims.d_y, "set_y dimension does not match d_y");
  require(K >= 0, "K must be nonnegative");
  require(eval_every >= 1, "eval_every must be >= 1");
  require(gamma >= 0.0 && gamma <= 1.0, "gamma must lie in [0, 1]");
  require(mu > 0.0, "mu must be positive");
  require(alpha > 0.0, "alpha must be positive");
  require(eta > 0.0, "eta must be positive");
  require(eta <= (2.0 / (c.L_g + c.mu_g)) * (1.0 + kBoundSlack), "eta must satisfy eta <= 2/(L_g + mu_g)");
  require(sigma > 0.0, "sigma must be positive");
  require(sigma <= (2.0 / (c.L_yy_phi + 2.0 * mu)) * (1.0 + kBoundSlack),
          "sigma must satisfy sigma <= 2/(L_yy_phi + 2 mu)");
  if (variant == Variant::kFp) require(tau > 0.0, "tau must be positive for fp");
  require(x0.size() == dims.n_x, "x0 has wrong dimension");
  require(y0.size() == dims.d_y, "y0 has wrong dimension");
  require(theta0.size() == dims.m_theta, "theta0 has wrong dimension");
  if (w0) require(w0->size() == dims.m_theta, "w0 has wrong dimension");
  require(set_x.contains(x0, 1e-9), "x0 must lie in set_x");
  require(set_y.contains(y0, 1e-9), "y0 must lie in set_y");
}

StepResult opf_step(const SpBilevelProblem& problem, const SetSpec& set_x, const SetSpec& set_y,
                    const SolverConfig& cfg, const IterateState& state) {
  return primal_dual_step(problem, set_x, set_y, cfg, state, Variant::kOpf);
}

StepResult fp_step(const SpBilevelProblem& problem, const SetSpec& set_x, const SetSpec& set_y,
                   const SolverConfig& cfg, const IterateState& state) {
  return primal_dual_step(problem, set_x, set_y, cfg, state, Variant::kFp);
}

StepResult step(const SpBilevelProblem& problem, const SetSpec& set_x, const SetSpec& set_y,
                const SolverConfig& cfg, const IterateState& state) {
  return primal_dual_step(problem, set_x, set_y, cfg, state, cfg.variant);
}

IterateState initial_state(const SolverConfig& cfg) {
  return IterateState{0, cfg.x0, cfg.y0, cfg.theta0, cfg.w0 ? *cfg.w0 : cfg.theta0};
}

bool is_observed_iteration(std::int64_t k, std::int64_t K, std::int64_t eval_every) {
  return k % eval_every == 0 || k == K - 1;
}

Trace run(const SpBilevelProblem& problem, const SetSpec& set_x, const SetSpec& set_y,
          const SolverConfig& cfg, const Observer& observer, const RunOptions& options) {
  cfg.validate(problem, set_x, set_y);
  Trace trace;
  if (options.keep_steps) trace.steps.reserve(static_cast<std::size_t>(cfg.K));
  IterateState state = initial_state(cfg);
  for (std::int64_t k = 0; k < cfg.K; ++k) {
    StepResult next = step(problem, set_x, set_y, cfg, state);
    if (observer && is_observed_iteration(k, cfg.K, cfg.eval_every)) observer(state, next.diagnostics);
    if (options.keep_steps) trace.steps.push_back(std::move(next.diagnostics));
    state = std::move(next.state);
    if (options.on_state) options.on_state(state);
  }
  trace.final_state = std::move(state);
  return trace;
}

// ---------------------------------------------------------------------------

void ScheduleFragment::apply_to(SolverConfig& cfg) const {
  cfg.gamma = gamma;
  cfg.mu = mu;
  cfg.sigma = sigma;
  cfg.alpha = alpha;
  cfg.eta = eta;
  if (tau) cfg.tau = *tau;
}

double default_inner_step(const SmoothnessConstants& constants) {
  return 2.0 / (constants.mu_g + constants.L_g);
}

namespace {

double clamp_gamma(double gamma) { return std::clamp(gamma, std::numeric_limits<double>::min(), 1.0); }

}  // namespace

ScheduleFragment schedule_experiment(Variant variant, std::int64_t K, double nu,
                                     const SmoothnessConstants& constants) {
  if (K < 1) throw ConfigError("schedule_experiment: K must be >= 1");
  if (!(nu > 0.0)) throw ConfigError("schedule_experiment: nu must be positive");
  constants.validate();
  const double k = static_cast<double>(K);
  ScheduleFragment f;
  if (variant == Variant::kOpf) {
    f.gamma = clamp_gamma(nu / std::cbrt(k * k));
    f.mu = nu / std::cbrt(k);
  } else {
    f.gamma = clamp_gamma(nu / std::sqrt(k));
    f.mu = nu / std::sqrt(std::sqrt(k));
    f.tau = 0.7;
  }
  f.sigma = 1.0 / f.mu;
  f.alpha = f.eta = default_inner_step(constants);
  return f;
}

ScheduleFragment schedule_theory(Variant variant, std::int64_t K,
                                 const SmoothnessConstants& constants) {
  if (K < 1) throw ConfigError("schedule_theory: K must be >= 1");
  constants.validate();
  const double k = static_cast<double>(K);
  const double kappa = constants.kappa_g();
  ScheduleFragment f;
  if (variant == Variant::kOpf) {
    if (constants.linear_in_y) {
      f.mu = kappa * kappa / std::cbrt(k);
      f.gamma = 1.0 / std::pow(kappa * k, 2.0 / 3.0);
    } else {
      f.mu = std::pow(kappa, 0.75) / std::pow(k, 0.25);
      f.gamma = 1.0 / std::pow(kappa * k, 0.75);
    }
  } else {
    if (constants.linear_in_y) {
      f.mu = 1.0 / std::pow(k, 0.25);
      f.gamma = 1.0 / std::sqrt(k);
    } else {
      f.mu = std::pow(kappa, 0.6) / std::pow(k, 0.2);
      f.gamma = std::pow(kappa, 1.8) / std::pow(k, 0.6);
    }
  }
  f.gamma = clamp_gamma(f.gamma);
  f.mu = std::max(f.mu, 1e-12);
  f.sigma = constants.linear_in_y ? 1.0 / f.mu : 2.0 / (constants.L_yy_phi + 2.0 * f.mu);
  if (variant == Variant::kFp) {
    f.tau = std::min(0.7, f.mu * f.mu / (f.gamma * kappa * kappa * kappa));
  }
  f.alpha = f.eta = default_inner_step(constants);
  return f;
}

TheoryConstants theory_constants(const SmoothnessConstants& constants, double eta, double mu) {
  constants.validate();
  if (!(eta > 0.0) || eta > (2.0 / (constants.L_g + constants.mu_g)) * (1.0 + kBoundSlack)) {
    throw ConfigError("theory_constants: eta must satisfy 0 < eta <= 2/(L_g + mu_g)");
  }
  if (!(mu > 0.0)) throw ConfigError("theory_constants: mu must be positive");
  TheoryConstants t;
  t.beta = (constants.L_g - constants.mu_g) / (constants.L_g + constants.mu_g);
  t.rho = std::max(0.0, 1.0 - eta * constants.mu_g);
  t.rho_d = constants.L_yy_phi / (constants.L_yy_phi + 2.0 * mu);
  t.kappa_g = constants.kappa_g();
  return t;
}

}  // namespace spb
