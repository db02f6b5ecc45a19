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
#include <optional>
#include <string>
#include <vector>

#include "spbilevel/benchmark/mtl.hpp"
#include "spbilevel/derivative_check.hpp"
#include "spbilevel/benchmark/toy.hpp"
#include "spbilevel/metrics.hpp"
#include "spbilevel/runner/config.hpp"
#include "spbilevel/runner/trace.hpp"
#include "spbilevel/solvers.hpp"

namespace spb::runner {

/// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitDiverged = 3;

struct ProblemInstance {
  SpBilevelProblem problem;
  SetSpec set_x;
  SetSpec set_y;
  std::optional<bench::MtlDataset> dataset;  // MTL problems only
  std::optional<bench::ToyQuadratic> toy;    // toy problem only
};

ProblemInstance build_instance(const RunConfig& cfg);

/// Step sizes from the configured schedule, explicit overrides on top, and
/// the start point (defaults: x0 = P_X(0), y0 = P_Y(0), theta0 = 0).
SolverConfig resolve_solver(const RunConfig& cfg, const ProblemInstance& instance);

struct RunOutcome {
  TraceFile trace;
  bool diverged = false;
  std::string divergence_message;
  std::int64_t stale_rows = 0;
  double max_infeasibility = 0.0;  // largest distance of any iterate to its set
};

/// Runs the solver and evaluates gaps at the observed iterations. Divergence
/// is reported in the outcome with the rows gathered so far.
RunOutcome execute_run(const RunConfig& cfg, const ProblemInstance& instance);

struct CommandContext {
  std::optional<std::string> out;    // --out
  std::optional<std::uint64_t> seed;  // --seed
  bool quiet = false;
  std::ostream* out_stream = nullptr;  // stdout when null
  std::ostream* err_stream = nullptr;  // stderr when null
};

/// Loads the config and applies the --seed / --out overrides. Throws
/// ConfigError.
RunConfig resolve_config(const std::filesystem::path& config_path, const CommandContext& ctx);

int cmd_run(const std::filesystem::path& config_path, const CommandContext& ctx);
int cmd_check(const std::filesystem::path& config_path, const CommandContext& ctx);
/// Writes task{i}_train.csv, task{i}_val.csv and ground_truth.txt into the
/// output directory (--out, else the config's output).
int cmd_datagen(const std::filesystem::path& config_path, const CommandContext& ctx);
int cmd_plot(const std::vector<std::filesystem::path>& traces, const std::filesystem::path& out_svg,
             const CommandContext& ctx);
/// Writes <output>.opf.csv and <output>.fp.csv.
int cmd_compare(const std::filesystem::path& config_path, const CommandContext& ctx);

/// SVG line chart of gap_z (log scale) against iter, one polyline per trace.
std::string render_svg(const std::vector<TraceFile>& traces);

/// The pass/fail table cmd_check prints.
CheckReport run_checks(const RunConfig& cfg, const ProblemInstance& instance);

}  // namespace spb::runner
