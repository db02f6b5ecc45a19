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

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "spbilevel/errors.hpp"
#include "spbilevel/rng.hpp"
#include "spbilevel/runner/commands.hpp"
#include "spbilevel/runner/config.hpp"
#include "spbilevel/runner/trace.hpp"

namespace spb::runner {
namespace {

namespace fs = std::filesystem;

class RunnerTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("spb_runner_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path write(const std::string& name, const std::string& content) const {
    const fs::path p = dir_ / name;
    std::ofstream(p, std::ios::binary) << content;
    return p;
  }

  CommandContext quiet_ctx() {
    CommandContext ctx;
    ctx.quiet = true;
    ctx.out_stream = &out_;
    ctx.err_stream = &err_;
    return ctx;
  }

  static std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  static std::string body_without_wall(const TraceFile& t) {
    std::string s;
    for (const auto& r : t.rows) s += format_row_body(r) + "\n";
    return s;
  }

  fs::path dir_;
  std::ostringstream out_, err_;
};

// --- config ------------------------------------------------------------------

TEST(RunConfigTest, PairsRoundTrip) {
  RunConfig cfg;
  cfg.problem = ProblemKind::kMtlSynthetic;
  cfg.solver = Variant::kFp;
  cfg.nu = 0.1;
  cfg.reg_rho = 1.0 / 3.0;
  cfg.nu_sweep = {0.1, 1, 10};
  cfg.gap_sigma = 2.5;
  cfg.x0 = Vec::LinSpaced(3, 0.1, 0.3);
  cfg.label = "fp run";
  std::map<std::string, std::string> pairs;
  for (const auto& [k, v] : cfg.to_pairs()) pairs[k] = v;
  const RunConfig back = RunConfig::from_pairs(pairs);
  EXPECT_EQ(back.to_pairs(), cfg.to_pairs());
  EXPECT_EQ(back.reg_rho, cfg.reg_rho);
  EXPECT_EQ(*back.x0, *cfg.x0);
}

TEST(RunConfigTest, RejectsUnknownKeysAndValues) {
  EXPECT_THROW(RunConfig::from_pairs({{"solvr", "opf"}}), ConfigError);
  try {
    RunConfig::from_pairs({{"solver", "sgd"}});
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("opf"), std::string::npos);
  }
  EXPECT_THROW(RunConfig::from_pairs({{"K", "ten"}}), ConfigError);
  EXPECT_THROW(RunConfig::from_pairs({{"nu_sweep", "1,x"}}), ConfigError);
}

TEST(RunConfigTest, ScientificIntegerAccepted) {
  EXPECT_EQ(RunConfig::from_pairs({{"K", "1e4"}}).K, 10000);
}

TEST(RunConfigTest, ValidateRejectsBadValues) {
  const auto invalid = [](std::map<std::string, std::string> p) {
    EXPECT_THROW(RunConfig::from_pairs(p).validate(), ConfigError) << p.begin()->first;
  };
  invalid({{"K", "0"}});
  invalid({{"eval_every", "0"}});
  invalid({{"nu", "0"}});
  invalid({{"tol_lower", "-1"}});
  invalid({{"problem", "mtl-csv"}});
  invalid({{"toy_mu_g", "6"}});
  EXPECT_NO_THROW(RunConfig{}.validate());
}

TEST(RunConfigTest, ExplicitScheduleNeedsEveryStep) {
  std::map<std::string, std::string> p = {
      {"schedule", "explicit"}, {"gamma", "0.1"}, {"sigma", "1"}, {"mu", "0.5"}, {"eta", "0.3"}, {"alpha", "0.3"}};
  EXPECT_NO_THROW(RunConfig::from_pairs(p).validate());
  p["solver"] = "fp";
  EXPECT_THROW(RunConfig::from_pairs(p).validate(), ConfigError);  // tau missing
  p["tau"] = "0.7";
  EXPECT_NO_THROW(RunConfig::from_pairs(p).validate());
  p.erase("mu");
  EXPECT_THROW(RunConfig::from_pairs(p).validate(), ConfigError);
}

TEST(ParsePairs, SkipsCommentsAndTrims) {
  std::istringstream in("# comment\n\nsolver = fp\n K=5 \n");
  const auto p = parse_pairs(in);
  EXPECT_EQ(p.at("solver"), "fp");
  EXPECT_EQ(p.at("K"), "5");
  std::istringstream bad("solver\n");
  EXPECT_THROW(parse_pairs(bad), ConfigError);
}

TEST(GapModeResolution, AutoFollowsVariant) {
  EXPECT_EQ(resolve_gap_mode(GapModeSetting::kAuto, Variant::kOpf), GapMode::kLmo);
  EXPECT_EQ(resolve_gap_mode(GapModeSetting::kAuto, Variant::kFp), GapMode::kProj);
  EXPECT_EQ(resolve_gap_mode(GapModeSetting::kProj, Variant::kOpf), GapMode::kProj);
}

// --- trace ---------------------------------------------------------------------

TEST(RunningAverage, CumulativeMean) {
  std::vector<TraceRow> rows(3);
  rows[0].gap_z = 3;
  rows[1].gap_z = 1;
  rows[2].gap_z = 2;
  rows[1].iter = 10;
  rows[2].iter = 20;
  EXPECT_EQ(running_average(rows), (std::vector<double>{3, 2, 2}));
  EXPECT_EQ(first_below(rows, 2.5), 10);
  EXPECT_EQ(first_below(rows, 2.0), std::nullopt);  // strict
  EXPECT_EQ(first_below(rows, 100.0), 0);
}

TEST_F(RunnerTest, TraceRoundTrip) {
  TraceFile t;
  t.set("trace_version", "1");
  t.set("label", "a b");
  for (int i = 0; i < 3; ++i) {
    TraceRow r;
    r.iter = 10 * i;
    r.gap_z = 1.0 / (i + 3);
    r.phi_surrogate = -0.1 * i;
    r.wall_ms = 1.25 * i;
    t.rows.push_back(r);
  }
  write_trace(dir_ / "t.csv", t);
  const TraceFile back = read_trace(dir_ / "t.csv");
  EXPECT_EQ(back.header, t.header);
  ASSERT_EQ(back.rows.size(), 3u);
  EXPECT_EQ(back.rows[2].gap_z, t.rows[2].gap_z);
  EXPECT_EQ(back.rows[1].wall_ms, 1.25);
  EXPECT_EQ(body_without_wall(back), body_without_wall(t));
}

TEST_F(RunnerTest, MalformedTracesCiteTheLine) {
  const std::string cols = trace_columns() + "\n";
  const auto msg = [&](const std::string& content) {
    const auto p = write("bad.csv", content);
    try {
      read_trace(p);
    } catch (const ParseError& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  EXPECT_NE(msg("# trace_version=1\n" + cols + "0,1,1,1,1,1,1,1,1\n").find("line 3"), std::string::npos);
  EXPECT_NE(msg("# trace_version=1\n" + cols + "0,1,1,1,1,1,1,1,1,x\n").find("line 3"), std::string::npos);
  EXPECT_NE(msg("# trace_version=1\n" + cols + "5,1,1,1,1,1,1,1,1,0\n5,1,1,1,1,1,1,1,1,0\n").find("line 4"),
            std::string::npos);
  EXPECT_NE(msg("# trace_version=1\n" + cols).find("empty trace body"), std::string::npos);
  EXPECT_NE(msg("# trace_version=1\nwrong,columns\n").find("line 2"), std::string::npos);
  EXPECT_NE(msg(cols + "0,1,1,1,1,1,1,1,1,0\n").find("trace_version"), std::string::npos);
  EXPECT_THROW(read_trace(dir_ / "missing.csv"), ParseError);
}

// --- commands ------------------------------------------------------------------

constexpr const char* kToyConfig = "problem=toy-quadratic\nsolver=opf\nK=200\neval_every=20\n";

TEST_F(RunnerTest, RunWritesOneRowPerEvaluation) {
  auto ctx = quiet_ctx();
  ctx.out = (dir_ / "trace.csv").string();
  ASSERT_EQ(cmd_run(write("c.cfg", kToyConfig), ctx), kExitOk) << err_.str();
  const TraceFile t = read_trace(dir_ / "trace.csv");
  ASSERT_EQ(t.rows.size(), 11u);
  EXPECT_EQ(t.rows.front().iter, 0);
  EXPECT_EQ(t.rows.back().iter, 199);
  EXPECT_LT(t.rows.back().gap_z, t.rows.front().gap_z);
  EXPECT_EQ(t.get("status"), "completed");
  EXPECT_EQ(t.get("config.K"), "200");
  EXPECT_EQ(t.get("gap.mode"), "lmo");
  EXPECT_TRUE(t.get("step.gamma").has_value());
}

TEST_F(RunnerTest, RunIsReproducibleAndRerunnableFromTrace) {
  auto ctx = quiet_ctx();
  const auto cfg = write("c.cfg", kToyConfig);
  ctx.out = (dir_ / "a.csv").string();
  ASSERT_EQ(cmd_run(cfg, ctx), kExitOk);
  ctx.out = (dir_ / "b.csv").string();
  ASSERT_EQ(cmd_run(cfg, ctx), kExitOk);
  // the trace header carries the full config, so a trace is itself a config
  ctx.out = (dir_ / "c.csv").string();
  ASSERT_EQ(cmd_run(dir_ / "a.csv", ctx), kExitOk) << err_.str();
  const auto a = body_without_wall(read_trace(dir_ / "a.csv"));
  EXPECT_EQ(a, body_without_wall(read_trace(dir_ / "b.csv")));
  EXPECT_EQ(a, body_without_wall(read_trace(dir_ / "c.csv")));
  ctx.seed = 99;
  ctx.out = (dir_ / "d.csv").string();
  ASSERT_EQ(cmd_run(cfg, ctx), kExitOk);
  EXPECT_NE(a, body_without_wall(read_trace(dir_ / "d.csv")));
}

TEST_F(RunnerTest, RunRejectsInvalidConfig) {
  auto ctx = quiet_ctx();
  EXPECT_EQ(cmd_run(write("c.cfg", "solver=sgd\n"), ctx), kExitUsage);
  EXPECT_NE(err_.str().find("sgd"), std::string::npos);
  EXPECT_EQ(cmd_run(dir_ / "nope.cfg", ctx), kExitUsage);
}

TEST_F(RunnerTest, UnstableExplicitStepIsRejected) {
  auto ctx = quiet_ctx();
  const auto cfg = write("c.cfg",
                         "problem=toy-quadratic\nschedule=explicit\n"
                         "gamma=0.1\nsigma=1\nmu=1\neta=3\nalpha=3\n");
  EXPECT_EQ(cmd_run(cfg, ctx), kExitUsage);
  EXPECT_NE(err_.str().find("eta"), std::string::npos);
}

TEST_F(RunnerTest, DivergenceWritesPartialTrace) {
  // labels near 1e6 with a tiny regularizer push the iterates past the runaway bound
  std::string csv = "f1,f2,y\n";
  Rng rng(1);
  for (int i = 0; i < 40; ++i) {
    csv += format_double(rng.normal()) + "," + format_double(rng.normal()) + "," + (i % 2 ? "1e6" : "-1e6") + "\n";
  }
  write("big.csv", csv);
  auto ctx = quiet_ctx();
  ctx.out = (dir_ / "div.csv").string();
  const auto cfg = write("c.cfg", "problem=mtl-csv\nnum_tasks=2\nreg_rho=0.001\nK=100\neval_every=1\ncsv_path=" +
                                      (dir_ / "big.csv").string() + "\n");
  EXPECT_EQ(cmd_run(cfg, ctx), kExitDiverged);
  EXPECT_NE(err_.str().find("divergence at iteration"), std::string::npos);
  const TraceFile t = read_trace(dir_ / "div.csv");
  EXPECT_EQ(t.get("status"), "diverged");
  EXPECT_FALSE(t.rows.empty());
  EXPECT_LT(t.rows.back().iter, 99);
}

TEST_F(RunnerTest, CheckPassesOnBuiltInProblems) {
  auto ctx = quiet_ctx();
  EXPECT_EQ(cmd_check(write("toy.cfg", kToyConfig), ctx), kExitOk) << out_.str();
  EXPECT_EQ(cmd_check(write("mtl.cfg", "problem=mtl-synthetic\nmtl_n=120\nmtl_d=5\nnum_tasks=3\n"), ctx), kExitOk)
      << out_.str();
  EXPECT_EQ(cmd_check(write("csv.cfg", "problem=mtl-csv\ncsv_path=/nonexistent.csv\n"), ctx), kExitUsage);
}

TEST_F(RunnerTest, DatagenWritesTaskFiles) {
  auto ctx = quiet_ctx();
  const auto cfg = write("g.cfg", "problem=mtl-synthetic\nmtl_n=100\nmtl_d=5\nnum_tasks=2\n");
  ctx.out = (dir_ / "a").string();
  ASSERT_EQ(cmd_datagen(cfg, ctx), kExitOk) << err_.str();
  for (const char* f : {"task1_train.csv", "task1_val.csv", "task2_train.csv", "task2_val.csv"}) {
    ASSERT_TRUE(fs::exists(dir_ / "a" / f)) << f;
  }
  const auto lines = [](const fs::path& p) {
    const std::string s = slurp(p);
    return std::count(s.begin(), s.end(), '\n');
  };
  EXPECT_EQ(lines(dir_ / "a" / "task1_train.csv"), 38 + 1);
  EXPECT_EQ(lines(dir_ / "a" / "task2_val.csv"), 12 + 1);
  EXPECT_TRUE(fs::exists(dir_ / "a" / "ground_truth.txt"));

  ctx.out = (dir_ / "b").string();
  ASSERT_EQ(cmd_datagen(cfg, ctx), kExitOk);
  for (const char* f : {"task1_train.csv", "task2_val.csv", "ground_truth.txt"}) {
    EXPECT_EQ(slurp(dir_ / "a" / f), slurp(dir_ / "b" / f)) << f;
  }
  EXPECT_EQ(cmd_datagen(write("small.cfg", "problem=mtl-synthetic\nmtl_n=7\nmtl_d=5\nnum_tasks=2\n"), ctx),
            kExitUsage);
}

TEST_F(RunnerTest, DatagenOutputLoadsAsCsvProblem) {
  auto ctx = quiet_ctx();
  ctx.out = (dir_ / "data").string();
  ASSERT_EQ(cmd_datagen(write("g.cfg", "problem=mtl-synthetic\nmtl_n=100\nmtl_d=5\nnum_tasks=2\n"), ctx), kExitOk);
  ctx.out.reset();
  const auto cfg = write("c.cfg", "problem=mtl-csv\nnum_tasks=2\ncsv_path=" +
                                      (dir_ / "data" / "task1_train.csv").string() + "\n");
  EXPECT_EQ(cmd_check(cfg, ctx), kExitOk) << out_.str() << err_.str();
}

TEST_F(RunnerTest, PlotDrawsOnePolylinePerTrace) {
  auto ctx = quiet_ctx();
  const auto cfg = write("c.cfg", std::string(kToyConfig) + "label=<toy & co>\n");
  ctx.out = (dir_ / "a.csv").string();
  ASSERT_EQ(cmd_run(cfg, ctx), kExitOk);
  ctx.out = (dir_ / "b.csv").string();
  ctx.seed = 3;
  ASSERT_EQ(cmd_run(cfg, ctx), kExitOk);
  ASSERT_EQ(cmd_plot({dir_ / "a.csv", dir_ / "b.csv"}, dir_ / "p.svg", ctx), kExitOk) << err_.str();
  const std::string svg = slurp(dir_ / "p.svg");
  std::size_t count = 0;
  for (auto pos = svg.find("<polyline"); pos != std::string::npos; pos = svg.find("<polyline", pos + 1)) ++count;
  EXPECT_EQ(count, 2u);
  EXPECT_NE(svg.find("data-y-scale=\"log\""), std::string::npos);
  EXPECT_NE(svg.find("&lt;toy &amp; co&gt;"), std::string::npos);

  write("empty.csv", "# trace_version=1\n" + trace_columns() + "\n");
  EXPECT_EQ(cmd_plot({dir_ / "empty.csv"}, dir_ / "q.svg", ctx), kExitUsage);
}

TEST_F(RunnerTest, CompareReportsThresholdCrossing) {
  auto ctx = quiet_ctx();
  ctx.out = (dir_ / "cmp").string();
  const std::string base = "problem=toy-quadratic\nK=5000\neval_every=100\nnu_sweep=0.5,1\n";
  ASSERT_EQ(cmd_compare(write("a.cfg", base + "threshold=1e9\n"), ctx), kExitOk) << err_.str();
  EXPECT_NE(out_.str().find("opf: nu="), std::string::npos);
  EXPECT_NE(out_.str().find("fp: nu="), std::string::npos);
  EXPECT_NE(out_.str().find("first_below=0"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir_ / "cmp.opf.csv"));
  EXPECT_TRUE(fs::exists(dir_ / "cmp.fp.csv"));

  out_.str("");
  ASSERT_EQ(cmd_compare(write("b.cfg", base + "threshold=0\n"), ctx), kExitOk);
  EXPECT_NE(out_.str().find("not reached"), std::string::npos);

  out_.str("");
  ASSERT_EQ(cmd_compare(write("c.cfg", base + "threshold=2\n"), ctx), kExitOk);
  EXPECT_EQ(out_.str().find("not reached"), std::string::npos) << out_.str();
}

}  // namespace
}  // namespace spb::runner
