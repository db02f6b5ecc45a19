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
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "spbilevel/problem.hpp"
#include "spbilevel/sets.hpp"

namespace spb {

/// OPF updates x with a linear minimization oracle (Frank-Wolfe type step);
/// FP updates x with a projected step. Both project the y update.
enum class Variant { kOpf, kFp };

std::string to_string(Variant v);
Variant parse_variant(const std::string& name);

/// Constant step sizes and starting point for one run.
struct SolverConfig {
  Variant variant = Variant::kOpf;
  std::int64_t K = 0;
  double gamma = 0.0;  // primal mixing weight in (0, 1]; 0 freezes x
  double sigma = 0.0;  // dual step
  double tau = 1.0;    // projected primal step (FP only)
  double eta = 0.0;    // adjoint step
  double alpha = 0.0;  // lower-level step
  double mu = 0.0;     // dual regularization weight
  Vec x0;
  Vec y0;  // also the anchor of the dual regularizer
  Vec theta0;
  std::optional<Vec> w0;  // defaults to theta0
  std::int64_t eval_every = 1;

  /// Checks step-size bounds against the problem constants and feasibility of
  /// x0, y0. Throws ConfigError. gamma = 0 is accepted so the primal can be
  /// frozen in diagnostics.
  void validate(const SpBilevelProblem& problem, const SetSpec& set_x, const SetSpec& set_y) const;
};

struct IterateState {
  std::int64_t k = 0;
  Vec x;
  Vec y;
  Vec theta;
  Vec w;
};

struct StepDiagnostics {
  Vec g_x;  // primal direction estimate
  Vec g_y;  // dual direction, before the regularizer
  Vec s;    // LMO vertex (OPF) or projected point (FP)
  double step_norm_x = 0.0;
  double step_norm_y = 0.0;
  double phi_surrogate = 0.0;  // Phi(x_k, theta_k, y_k)
};

struct StepResult {
  IterateState state;
  StepDiagnostics diagnostics;
};

/// Iterates whose infinity norm exceeds this are reported as divergence.
inline constexpr double kDivergenceBound = 1e12;

/// One iteration of the one-sided projection-free method:
///   w+ = w - eta (H(x,theta) w - grad_theta Phi)
///   G^x = grad_x Phi - J_{theta x}(x,theta) w+,  G^y = grad_y Phi
///   s = lmo(G^x),  x+ = gamma s + (1 - gamma) x
///   theta+ = theta - alpha grad_theta g(x+, theta)
///   y+ = P_Y(y + sigma (G^y - mu (y - y0)))
StepResult opf_step(const SpBilevelProblem& problem, const SetSpec& set_x, const SetSpec& set_y,
                    const SolverConfig& cfg, const IterateState& state);

/// Same as opf_step with s = P_X(x - tau G^x).
StepResult fp_step(const SpBilevelProblem& problem, const SetSpec& set_x, const SetSpec& set_y,
                   const SolverConfig& cfg, const IterateState& state);

StepResult step(const SpBilevelProblem& problem, const SetSpec& set_x, const SetSpec& set_y,
                const SolverConfig& cfg, const IterateState& state);

IterateState initial_state(const SolverConfig& cfg);

/// Called with the pre-step state k and the diagnostics of step k for
/// k = 0, eval_every, 2 eval_every, ... and for k = K - 1.
using Observer = std::function<void(const IterateState&, const StepDiagnostics&)>;

struct Trace {
  std::vector<StepDiagnostics> steps;
  IterateState final_state;
};

struct RunOptions {
  bool keep_steps = true;  // store every StepDiagnostics in the trace
  /// Called with every post-step state k + 1.
  std::function<void(const IterateState&)> on_state;
};

/// Runs K iterations of the configured variant. Deterministic.
Trace run(const SpBilevelProblem& problem, const SetSpec& set_x, const SetSpec& set_y,
          const SolverConfig& cfg, const Observer& observer = {}, const RunOptions& options = {});

bool is_observed_iteration(std::int64_t k, std::int64_t K, std::int64_t eval_every);

// ---------------------------------------------------------------------------
// Step-size schedules

/// The step sizes a schedule determines. tau is set only for FP.
struct ScheduleFragment {
  double gamma = 0.0;
  double mu = 0.0;
  double sigma = 0.0;
  double alpha = 0.0;
  double eta = 0.0;
  std::optional<double> tau;

  void apply_to(SolverConfig& cfg) const;
};

/// Lower-level / adjoint step 2 / (mu_g + L_g).
double default_inner_step(const SmoothnessConstants& constants);

/// The tuned experiment schedule: OPF gamma = nu K^{-2/3}, mu = nu K^{-1/3};
/// FP gamma = nu K^{-1/2}, mu = nu K^{-1/4}, tau = 0.7; sigma = 1/mu and
/// alpha = eta = 2/(mu_g + L_g) for both. gamma is clamped to (0, 1].
ScheduleFragment schedule_experiment(Variant variant, std::int64_t K, double nu,
                                     const SmoothnessConstants& constants);

/// Schedule from the complexity bounds with all hidden constants set to 1:
///
///   OPF, general:      mu = kappa^{3/4} K^{-1/4}, gamma = (kappa K)^{-3/4}
///   OPF, linear in y:  mu = kappa^2 K^{-1/3},     gamma = (kappa K)^{-2/3}
///   FP,  general:      mu = kappa^{3/5} K^{-1/5}, gamma = kappa^{9/5} K^{-3/5}
///   FP,  linear in y:  mu = K^{-1/4},             gamma = K^{-1/2}
///
/// sigma = 1/mu if linear in y, else 2/(L_yy + 2 mu). FP uses
/// tau = min(0.7, mu^2 / (gamma kappa^3)). gamma is clamped to (0, 1] and mu
/// below at 1e-12.
ScheduleFragment schedule_theory(Variant variant, std::int64_t K,
                                 const SmoothnessConstants& constants);

/// Contraction factors of the lower-level step (beta), the adjoint step
/// (rho) and the regularized dual step (rho_d), plus kappa_g = L_g / mu_g.
struct TheoryConstants {
  double beta = 0.0;
  double rho = 0.0;
  double rho_d = 0.0;
  double kappa_g = 1.0;
};

TheoryConstants theory_constants(const SmoothnessConstants& constants, double eta, double mu);

}  // namespace spb
