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
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "spbilevel/benchmark/mtl.hpp"
#include "spbilevel/benchmark/toy.hpp"
#include "spbilevel/metrics.hpp"
#include "spbilevel/solvers.hpp"

namespace spb::runner {

enum class ProblemKind { kToyQuadratic, kMtlSynthetic, kMtlCsv };
enum class ScheduleSource { kExperiment, kTheory, kExplicit };
/// kAuto: lmo for opf, proj for fp. kLmoBoth: lmo for every variant.
enum class GapModeSetting { kLmo, kProj, kAuto, kLmoBoth };

/// Flat key=value run description. Every field has a key of the same name
/// (see README for the full list).
struct RunConfig {
  ProblemKind problem = ProblemKind::kToyQuadratic;
  std::uint64_t seed = 1;

  Index toy_n_x = 4;
  Index toy_m_theta = 3;
  Index toy_d_y = 3;
  double toy_mu_g = 1.0;
  double toy_L_g = 5.0;

  Index mtl_n = 5000;
  Index mtl_d = 100;
  int num_tasks = 5;
  double reg_rho = 0.1;
  double l1_radius = 10.0;
  double split_frac = 0.75;
  double noise_std = 0.1;
  bench::LipschitzBound lipschitz = bench::LipschitzBound::kFrobenius;
  std::string csv_path;
  std::string label_column = "y";

  Variant solver = Variant::kOpf;
  ScheduleSource schedule = ScheduleSource::kExperiment;
  double nu = 1.0;
  std::vector<double> nu_sweep;  // compare: best nu per variant
  std::int64_t K = 10000;
  std::int64_t eval_every = 100;
  GapModeSetting gap_mode = GapModeSetting::kAuto;
  double gap_tau = 1.0;  // tau for proj-mode gaps of opf runs
  std::optional<double> gap_sigma;  // defaults to the solver's sigma
  double tol_lower = 1e-9;
  double tol_adjoint = 1e-9;
  std::int64_t max_inner_iter = 200000;
  double threshold = 1e-2;  // compare

  std::optional<double> gamma, sigma, tau, mu, eta, alpha;  // explicit schedule
  std::optional<Vec> x0, y0, theta0;

  std::string output = "trace.csv";
  std::string label;  // legend entry; defaults to the variant name

  /// Throws ConfigError on unknown keys or unparsable values.
  static RunConfig from_pairs(const std::map<std::string, std::string>& pairs);
  /// Every key with its resolved value, in a fixed order. Doubles use
  /// round-trip precision, so from_pairs(to_pairs()) reproduces the config.
  std::vector<std::pair<std::string, std::string>> to_pairs() const;
  void validate() const;

  bench::MtlConfig mtl_config() const;
  bench::ToyOptions toy_options() const;
};

/// Parses key=value lines; blank lines and '#' comments are skipped.
std::map<std::string, std::string> parse_pairs(std::istream& in);

/// Loads a config file. A trace file is also accepted: its "# config.key=value"
/// header lines are the resolved config of the run that produced it.
RunConfig load_config(const std::filesystem::path& path);

std::string to_string(ProblemKind kind);
std::string to_string(ScheduleSource source);
std::string to_string(GapModeSetting mode);

GapMode resolve_gap_mode(GapModeSetting setting, Variant variant);

std::string format_double(double value);

}  // namespace spb::runner
