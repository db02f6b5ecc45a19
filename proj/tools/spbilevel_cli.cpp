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

// spbilevel command-line front end.

#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "spbilevel/runner/commands.hpp"

int main(int argc, char** argv) {
  namespace r = spb::runner;
  CLI::App app{"Bilevel saddle-point solvers: runs, checks, data generation and plots"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out;
  std::uint64_t seed = 0;
  bool quiet = false;
  app.add_option("--config", config_path, "key=value config file")->check(CLI::ExistingFile);
  app.add_option("--out", out, "output path (trace, SVG or datagen directory)");
  auto* seed_opt = app.add_option("--seed", seed, "overrides the config seed");
  app.add_flag("-q,--quiet", quiet, "print only errors");

  auto* run = app.add_subcommand("run", "run one solver and write a trace");
  auto* check = app.add_subcommand("check", "derivative and oracle self-checks");
  auto* datagen = app.add_subcommand("datagen", "write the synthetic multi-task dataset");
  auto* compare = app.add_subcommand("compare", "run both variants on the same problem");
  auto* plot = app.add_subcommand("plot", "SVG chart of gap_z against iteration");
  std::vector<std::string> traces;
  plot->add_option("traces", traces, "trace files")->required()->check(CLI::ExistingFile);
  for (auto* sub : {run, check, datagen, compare, plot}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return r::kExitUsage;
  }

  r::CommandContext ctx;
  ctx.quiet = quiet;
  if (!out.empty()) ctx.out = out;
  if (seed_opt->count() > 0) ctx.seed = seed;

  if (plot->parsed()) {
    if (out.empty()) {
      std::cerr << "error: plot requires --out PATH\n";
      return r::kExitUsage;
    }
    std::vector<std::filesystem::path> paths(traces.begin(), traces.end());
    return r::cmd_plot(paths, out, ctx);
  }
  if (config_path.empty()) {
    std::cerr << "error: --config PATH is required\n";
    return r::kExitUsage;
  }
  if (run->parsed()) return r::cmd_run(config_path, ctx);
  if (check->parsed()) return r::cmd_check(config_path, ctx);
  if (datagen->parsed()) return r::cmd_datagen(config_path, ctx);
  return r::cmd_compare(config_path, ctx);
}
