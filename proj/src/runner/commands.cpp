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

#include "spbilevel/runner/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <sstream>

#include "spbilevel/benchmark/csv.hpp"
#include "spbilevel/errors.hpp"
#include "spbilevel/reference.hpp"
#include "spbilevel/rng.hpp"

namespace spb::runner {

namespace {

std::ostream& out_of(const CommandContext& ctx) { return ctx.out_stream ? *ctx.out_stream : std::cout; }
std::ostream& err_of(const CommandContext& ctx) { return ctx.err_stream ? *ctx.err_stream : std::cerr; }

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

double elapsed_ms(std::chrono::steady_clock::time_point from, std::chrono::steady_clock::time_point to) {
  return std::chrono::duration<double, std::milli>(to - from).count();
}

}  // namespace

ProblemInstance build_instance(const RunConfig& cfg) {
  if (cfg.problem == ProblemKind::kToyQuadratic) {
    auto toy = bench::toy_quadratic(cfg.toy_options());
    return ProblemInstance{toy.problem, toy.set_x, toy.set_y, std::nullopt, toy};
  }
  bench::MtlDataset dataset;
  if (cfg.problem == ProblemKind::kMtlSynthetic) {
    dataset = bench::gen_synthetic(cfg.mtl_n, cfg.mtl_d, cfg.mtl_config()).dataset;
  } else {
    const auto table = bench::load_csv(cfg.csv_path, cfg.label_column);
    dataset = bench::partition_tasks(table.features, table.labels, cfg.mtl_config());
  }
  auto mtl = bench::build_mtl_problem(dataset, cfg.mtl_config());
  return ProblemInstance{std::move(mtl.problem), std::move(mtl.set_x), std::move(mtl.set_y), std::move(dataset),
                         std::nullopt};
}

SolverConfig resolve_solver(const RunConfig& cfg, const ProblemInstance& inst) {
  SolverConfig s;
  s.variant = cfg.solver;
  s.K = cfg.K;
  s.eval_every = cfg.eval_every;
  const auto& c = inst.problem.constants;
  if (cfg.schedule == ScheduleSource::kExperiment) {
    schedule_experiment(cfg.solver, cfg.K, cfg.nu, c).apply_to(s);
  } else if (cfg.schedule == ScheduleSource::kTheory) {
    schedule_theory(cfg.solver, cfg.K, c).apply_to(s);
  } else {
    s.alpha = default_inner_step(c);
    s.eta = s.alpha;
  }
  if (cfg.gamma) s.gamma = *cfg.gamma;
  if (cfg.sigma) s.sigma = *cfg.sigma;
  if (cfg.tau) s.tau = *cfg.tau;
  if (cfg.mu) s.mu = *cfg.mu;
  if (cfg.eta) s.eta = *cfg.eta;
  if (cfg.alpha) s.alpha = *cfg.alpha;
  const Dims& d = inst.problem.dims;
  s.x0 = cfg.x0 ? *cfg.x0 : inst.set_x.project(Vec::Zero(d.n_x));
  s.y0 = cfg.y0 ? *cfg.y0 : inst.set_y.project(Vec::Zero(d.d_y));
  s.theta0 = cfg.theta0 ? *cfg.theta0 : Vec::Zero(d.m_theta);
  return s;
}

RunOutcome execute_run(const RunConfig& cfg, const ProblemInstance& inst) {
  const SolverConfig solver = resolve_solver(cfg, inst);
  solver.validate(inst.problem, inst.set_x, inst.set_y);

  GapOptions gap;
  gap.mode = resolve_gap_mode(cfg.gap_mode, cfg.solver);
  gap.sigma = cfg.gap_sigma.value_or(solver.sigma);
  gap.tau = cfg.solver == Variant::kFp ? solver.tau : cfg.gap_tau;
  gap.gradients.lower = {cfg.tol_lower, cfg.max_inner_iter};
  gap.gradients.adjoint = {cfg.tol_adjoint, cfg.max_inner_iter};
  gap.gradients.accept_inexact = true;

  RunOutcome outcome;
  auto& rows = outcome.trace.rows;
  using clock = std::chrono::steady_clock;
  const auto start = clock::now();
  double excluded_ms = 0.0;

  Observer observer = [&](const IterateState& st, const StepDiagnostics& diag) {
    const auto enter = clock::now();
    GapOptions opts = gap;
    opts.gradients.theta_start = st.theta;
    const GapReport rep = gap_report(inst.problem, inst.set_x, inst.set_y, st.x, st.y, opts);
    TraceRow row;
    row.iter = st.k;
    row.gap_x = rep.gap_x;
    row.gap_y = rep.gap_y;
    row.gap_z = rep.gap_z;
    row.phi_surrogate = diag.phi_surrogate;
    row.step_norm_x = diag.step_norm_x;
    row.step_norm_y = diag.step_norm_y;
    row.lower_residual = rep.lower_residual;
    row.adjoint_residual = rep.adjoint_residual;
    row.wall_ms = elapsed_ms(start, enter) - excluded_ms;
    rows.push_back(row);
    if (rep.stale) ++outcome.stale_rows;
    excluded_ms += elapsed_ms(enter, clock::now());
  };
  RunOptions options;
  options.keep_steps = false;
  options.on_state = [&](const IterateState& st) {
    outcome.max_infeasibility =
        std::max({outcome.max_infeasibility, inst.set_x.distance(st.x), inst.set_y.distance(st.y)});
  };

  try {
    run(inst.problem, inst.set_x, inst.set_y, solver, observer, options);
  } catch (const DivergenceError& e) {
    outcome.diverged = true;
    outcome.divergence_message = e.what();
  }

  TraceFile& t = outcome.trace;
  t.set("trace_version", std::to_string(kTraceVersion));
  t.set("library_version", kLibraryVersion);
  t.set("timestamp", utc_timestamp());
  t.set("label", cfg.label.empty() ? to_string(cfg.solver) : cfg.label);
  t.set("status", outcome.diverged ? "diverged" : "completed");
  if (outcome.diverged) t.set("divergence", outcome.divergence_message);
  t.set("stale_rows", std::to_string(outcome.stale_rows));
  t.set("max_infeasibility", format_double(outcome.max_infeasibility));
  const TheoryConstants tc = theory_constants(inst.problem.constants, solver.eta, solver.mu);
  t.set("theory.beta", format_double(tc.beta));
  t.set("theory.rho", format_double(tc.rho));
  t.set("theory.rho_d", format_double(tc.rho_d));
  t.set("theory.kappa_g", format_double(tc.kappa_g));
  t.set("step.gamma", format_double(solver.gamma));
  t.set("step.sigma", format_double(solver.sigma));
  t.set("step.tau", cfg.solver == Variant::kFp ? format_double(solver.tau) : "none");
  t.set("step.mu", format_double(solver.mu));
  t.set("step.eta", format_double(solver.eta));
  t.set("step.alpha", format_double(solver.alpha));
  t.set("gap.mode", to_string(gap.mode));
  t.set("gap.sigma", format_double(gap.sigma));
  t.set("gap.tau", gap.mode == GapMode::kProj ? format_double(gap.tau) : "none");
  for (const auto& [k, v] : cfg.to_pairs()) t.set("config." + k, v);
  return outcome;
}

RunConfig resolve_config(const std::filesystem::path& config_path, const CommandContext& ctx) {
  RunConfig cfg = load_config(config_path);
  if (ctx.seed) cfg.seed = *ctx.seed;
  if (ctx.out) cfg.output = *ctx.out;
  cfg.validate();
  return cfg;
}

int cmd_run(const std::filesystem::path& config_path, const CommandContext& ctx) {
  try {
    const RunConfig cfg = resolve_config(config_path, ctx);
    const ProblemInstance inst = build_instance(cfg);
    const RunOutcome outcome = execute_run(cfg, inst);
    write_trace(cfg.output, outcome.trace);
    if (outcome.diverged) {
      err_of(ctx) << "error: " << outcome.divergence_message << " (partial trace written to " << cfg.output << ")\n";
      return kExitDiverged;
    }
    if (outcome.stale_rows > 0) {
      err_of(ctx) << "warning: " << outcome.stale_rows << " gap rows used inexact inner solves\n";
    }
    if (!ctx.quiet) {
      const auto& last = outcome.trace.rows.back();
      out_of(ctx) << "wrote " << outcome.trace.rows.size() << " rows to " << cfg.output << "; final gap_z "
                  << format_double(last.gap_z) << " at iter " << last.iter << '\n';
    }
    return kExitOk;
  } catch (const DivergenceError& e) {
    err_of(ctx) << "error: " << e.what() << '\n';
    return kExitDiverged;
  } catch (const Error& e) {
    err_of(ctx) << "error: " << e.what() << '\n';
    return kExitUsage;
  }
}

// ---------------------------------------------------------------------------
// check

namespace {

void add_entry(CheckReport& report, std::string name, double error, double tol) {
  report.entries.push_back({std::move(name), error, tol, error <= tol});
}

std::size_t vertex_count(const SetSpec& set) {
  return std::visit(
      [](const auto& s) -> std::size_t {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, L1Ball>) {
          return static_cast<std::size_t>(2 * s.dim);
        } else if constexpr (std::is_same_v<T, Simplex>) {
          return static_cast<std::size_t>(s.dim);
        } else if constexpr (std::is_same_v<T, Box>) {
          return s.lo.size() > 20 ? SIZE_MAX : (std::size_t{1} << s.lo.size());
        } else if constexpr (std::is_same_v<T, Product>) {
          std::size_t n = 1;
          for (const auto& f : s.factors) {
            const std::size_t m = vertex_count(*f.set);
            if (m == 0 || m == SIZE_MAX || n > SIZE_MAX / m) return SIZE_MAX;
            n *= m;
          }
          return n;
        } else {
          return 0;  // not a polytope
        }
      },
      set.variant());
}

// Worst objective mismatch of lmo against vertex enumeration over random costs.
double lmo_mismatch(const SetSpec& set, Rng& rng, int trials) {
  double worst = 0.0;
  for (int i = 0; i < trials; ++i) {
    const Vec c = rng.normal_vector(set.dim());
    const double a = c.dot(set.lmo(c));
    const double b = c.dot(reference::lmo_by_enumeration(set, c));
    worst = std::max(worst, std::abs(a - b) / std::max(1.0, std::abs(b)));
  }
  return worst;
}

double simplex_projection_mismatch(Index n, Rng& rng, int trials) {
  double worst = 0.0;
  const SetSpec simplex = SetSpec::simplex(n);
  for (int i = 0; i < trials; ++i) {
    const Vec p = 2.0 * rng.normal_vector(n);
    worst = std::max(worst, (simplex.project(p) - reference::simplex_projection_by_supports(p)).lpNorm<Eigen::Infinity>());
  }
  return worst;
}

}  // namespace

CheckReport run_checks(const RunConfig& cfg, const ProblemInstance& inst) {
  const Dims& d = inst.problem.dims;
  Rng rng(cfg.seed ^ 0x636865636bULL);
  const Vec x = inst.set_x.project(rng.normal_vector(d.n_x));
  const Vec y = inst.set_y.project(rng.normal_vector(d.d_y));
  const Vec theta = rng.normal_vector(d.m_theta);

  CheckOptions opts;
  opts.seed = cfg.seed;
  CheckReport report = check_gradients(inst.problem, x, theta, y, opts);
  for (auto& e : check_hvp(inst.problem, x, theta, opts).entries) report.entries.push_back(std::move(e));

  constexpr std::size_t kMaxVertices = 100000;
  for (const auto* set : {&inst.set_x, &inst.set_y}) {
    const std::string which = set == &inst.set_x ? "set_x" : "set_y";
    const std::size_t n = vertex_count(*set);
    if (n > 0 && n <= kMaxVertices) add_entry(report, "lmo_enumeration_" + which, lmo_mismatch(*set, rng, 20), 1e-12);
  }
  add_entry(report, "simplex_projection_supports", simplex_projection_mismatch(std::min<Index>(std::max<Index>(d.d_y, 2), 10), rng, 20), 1e-10);

  if (inst.dataset) {
    const Index dim = inst.dataset->d;
    const auto T = static_cast<Index>(inst.dataset->tasks.size());
    double worst = 0.0;
    for (int i = 0; i < 5; ++i) {
      const Vec xt = inst.set_x.project(rng.normal_vector(d.n_x));
      const Vec exact = bench::exact_lower_solution(*inst.dataset, xt.head(dim), xt.tail(T), cfg.reg_rho);
      const auto solved = solve_lower(inst.problem, xt, {1e-10, cfg.max_inner_iter});
      worst = std::max(worst, (exact - solved.solution).lpNorm<Eigen::Infinity>() /
                                  std::max(1.0, exact.lpNorm<Eigen::Infinity>()));
    }
    add_entry(report, "exact_lower_vs_solve_lower", worst, 1e-8);
  }
  if (inst.toy) {
    const auto& closed = inst.toy->closed;
    GradientOptions tight;
    tight.lower = {1e-12, cfg.max_inner_iter};
    tight.adjoint = {1e-12, cfg.max_inner_iter};
    const auto grads = implicit_gradients(inst.problem, x, y, tight);
    add_entry(report, "closed_form_theta_star", (grads.theta_star - closed.theta_star(x)).lpNorm<Eigen::Infinity>(), 1e-8);
    add_entry(report, "closed_form_grad_x", (grads.grad_x - closed.grad_x(x, y)).lpNorm<Eigen::Infinity>(), 1e-8);
    add_entry(report, "closed_form_grad_y", (grads.grad_y - closed.grad_y(x)).lpNorm<Eigen::Infinity>(), 1e-8);
  }
  return report;
}

int cmd_check(const std::filesystem::path& config_path, const CommandContext& ctx) {
  try {
    const RunConfig cfg = resolve_config(config_path, ctx);
    const ProblemInstance inst = build_instance(cfg);
    const CheckReport report = run_checks(cfg, inst);
    if (!ctx.quiet || !report.passed()) out_of(ctx) << report.table();
    return report.passed() ? kExitOk : kExitCheckFailed;
  } catch (const Error& e) {
    err_of(ctx) << "error: " << e.what() << '\n';
    return kExitUsage;
  }
}

// ---------------------------------------------------------------------------
// datagen

int cmd_datagen(const std::filesystem::path& config_path, const CommandContext& ctx) {
  try {
    RunConfig cfg = load_config(config_path);
    if (ctx.seed) cfg.seed = *ctx.seed;
    if (cfg.mtl_n < 4 * cfg.num_tasks) {
      throw ConfigError("datagen needs mtl_n >= 4 * num_tasks (got n=" + std::to_string(cfg.mtl_n) +
                        ", T=" + std::to_string(cfg.num_tasks) + ")");
    }
    cfg.problem = ProblemKind::kMtlSynthetic;
    cfg.validate();
    const std::filesystem::path dir = ctx.out ? std::filesystem::path(*ctx.out) : std::filesystem::path(cfg.output);
    std::filesystem::create_directories(dir);
    const auto data = bench::gen_synthetic(cfg.mtl_n, cfg.mtl_d, cfg.mtl_config());
    std::vector<std::string> names;
    for (Index j = 0; j < cfg.mtl_d; ++j) names.push_back("f" + std::to_string(j + 1));
    const auto& tasks = data.dataset.tasks;
    for (std::size_t i = 0; i < tasks.size(); ++i) {
      const std::string stem = "task" + std::to_string(i + 1);
      bench::write_csv(dir / (stem + "_train.csv"), tasks[i].a_train, tasks[i].b_train, names, cfg.label_column);
      bench::write_csv(dir / (stem + "_val.csv"), tasks[i].a_val, tasks[i].b_val, names, cfg.label_column);
    }
    std::ofstream gt(dir / "ground_truth.txt", std::ios::binary | std::ios::trunc);
    auto join = [](const Vec& v) {
      std::string s;
      for (Index j = 0; j < v.size(); ++j) s += (j ? "," : "") + format_double(v(j));
      return s;
    };
    gt << "# seed=" << cfg.seed << "\n";
    gt << "x=" << join(data.truth.x) << '\n';
    for (Index i = 0; i < data.truth.y.cols(); ++i) gt << "y" << (i + 1) << '=' << join(data.truth.y.col(i)) << '\n';
    gt << "lambda=" << join(data.truth.lambda) << '\n';
    if (!gt) throw ConfigError("cannot write ground truth to '" + dir.string() + "'");
    if (!ctx.quiet) out_of(ctx) << "wrote " << 2 * tasks.size() << " task files to " << dir.string() << '\n';
    return kExitOk;
  } catch (const Error& e) {
    err_of(ctx) << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::filesystem::filesystem_error& e) {
    err_of(ctx) << "error: " << e.what() << '\n';
    return kExitUsage;
  }
}

// ---------------------------------------------------------------------------
// plot

namespace {

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default:
        // XML 1.0 forbids most control characters
        if (static_cast<unsigned char>(ch) >= 0x20 || ch == '\t') out += ch;
    }
  }
  return out;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

}  // namespace

std::string render_svg(const std::vector<TraceFile>& traces) {
  constexpr double kWidth = 800, kHeight = 500, kLeft = 80, kRight = 180, kTop = 30, kBottom = 60;
  constexpr const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};
  constexpr double kFloor = 1e-300;

  double max_iter = 1;
  double lo = INFINITY, hi = -INFINITY;
  for (const auto& t : traces) {
    for (const auto& r : t.rows) {
      max_iter = std::max(max_iter, static_cast<double>(r.iter));
      const double v = std::log10(std::max(r.gap_z, kFloor));
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  double dec_lo = std::floor(lo), dec_hi = std::ceil(hi);
  if (dec_hi <= dec_lo) dec_hi = dec_lo + 1;
  const double plot_w = kWidth - kLeft - kRight, plot_h = kHeight - kTop - kBottom;
  auto px = [&](double iter) { return kLeft + plot_w * iter / max_iter; };
  auto py = [&](double gap) {
    const double v = std::log10(std::max(gap, kFloor));
    return kTop + plot_h * (dec_hi - v) / (dec_hi - dec_lo);
  };

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
      << "<rect x=\"0\" y=\"0\" width=\"" << kWidth << "\" height=\"" << kHeight << "\" fill=\"white\"/>\n";
  svg << "<g class=\"axes\" data-y-scale=\"log\">\n"
      << "<line x1=\"" << kLeft << "\" y1=\"" << kTop + plot_h << "\" x2=\"" << kLeft + plot_w << "\" y2=\""
      << kTop + plot_h << "\" stroke=\"black\"/>\n"
      << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\"" << kTop + plot_h
      << "\" stroke=\"black\"/>\n";
  const int step = std::max(1, static_cast<int>(std::ceil((dec_hi - dec_lo) / 10.0)));
  for (double e = dec_lo; e <= dec_hi; e += step) {
    const double y = kTop + plot_h * (dec_hi - e) / (dec_hi - dec_lo);
    svg << "<line x1=\"" << kLeft - 5 << "\" y1=\"" << fmt(y) << "\" x2=\"" << kLeft << "\" y2=\"" << fmt(y)
        << "\" stroke=\"black\"/>\n"
        << "<text x=\"" << kLeft - 8 << "\" y=\"" << fmt(y + 4) << "\" text-anchor=\"end\">1e"
        << static_cast<int>(e) << "</text>\n";
  }
  for (int i = 0; i <= 5; ++i) {
    const double iter = max_iter * i / 5.0;
    svg << "<text x=\"" << fmt(px(iter)) << "\" y=\"" << kTop + plot_h + 18 << "\" text-anchor=\"middle\">"
        << static_cast<long long>(std::llround(iter)) << "</text>\n";
  }
  svg << "<text x=\"" << kLeft + plot_w / 2 << "\" y=\"" << kHeight - 15 << "\" text-anchor=\"middle\">iteration</text>\n"
      << "<text x=\"20\" y=\"" << kTop + plot_h / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 20 "
      << kTop + plot_h / 2 << ")\">gap_z (log scale)</text>\n"
      << "</g>\n";

  for (std::size_t i = 0; i < traces.size(); ++i) {
    const char* color = kColors[i % (sizeof(kColors) / sizeof(kColors[0]))];
    svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t j = 0; j < traces[i].rows.size(); ++j) {
      const auto& r = traces[i].rows[j];
      svg << (j ? " " : "") << fmt(px(static_cast<double>(r.iter))) << ',' << fmt(py(r.gap_z));
    }
    svg << "\"/>\n";
    const double ly = kTop + 10 + 20.0 * static_cast<double>(i);
    const std::string label = traces[i].get("label").value_or("trace " + std::to_string(i + 1));
    svg << "<line x1=\"" << kLeft + plot_w + 15 << "\" y1=\"" << ly << "\" x2=\"" << kLeft + plot_w + 40
        << "\" y2=\"" << ly << "\" stroke=\"" << color << "\" stroke-width=\"1.5\"/>\n"
        << "<text x=\"" << kLeft + plot_w + 45 << "\" y=\"" << ly + 4 << "\">" << xml_escape(label) << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

int cmd_plot(const std::vector<std::filesystem::path>& paths, const std::filesystem::path& out_svg,
             const CommandContext& ctx) {
  try {
    if (paths.empty()) throw ConfigError("plot needs at least one trace file");
    std::vector<TraceFile> traces;
    for (const auto& p : paths) traces.push_back(read_trace(p));
    std::ofstream out(out_svg, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write '" + out_svg.string() + "'");
    out << render_svg(traces);
    if (!ctx.quiet) out_of(ctx) << "wrote " << out_svg.string() << '\n';
    return kExitOk;
  } catch (const Error& e) {
    err_of(ctx) << "error: " << e.what() << '\n';
    return kExitUsage;
  }
}

// ---------------------------------------------------------------------------
// compare

int cmd_compare(const std::filesystem::path& config_path, const CommandContext& ctx) {
  try {
    const RunConfig base = resolve_config(config_path, ctx);
    const ProblemInstance inst = build_instance(base);
    std::vector<double> nus = base.nu_sweep.empty() ? std::vector<double>{base.nu} : base.nu_sweep;
    if (base.schedule != ScheduleSource::kExperiment) nus = {base.nu};
    int status = kExitOk;
    for (const Variant variant : {Variant::kOpf, Variant::kFp}) {
      std::optional<RunOutcome> best;
      double best_nu = nus.front();
      for (const double nu : nus) {
        RunConfig cfg = base;
        cfg.solver = variant;
        cfg.nu = nu;
        cfg.nu_sweep.clear();
        if (cfg.label.empty()) cfg.label = to_string(variant);
        RunOutcome outcome = execute_run(cfg, inst);
        const auto score = [](const RunOutcome& o) {
          return o.diverged ? INFINITY : running_average(o.trace.rows).back();
        };
        if (!best || score(outcome) < score(*best)) {
          best = std::move(outcome);
          best_nu = nu;
        }
      }
      const std::string path = base.output + "." + to_string(variant) + ".csv";
      write_trace(path, best->trace);
      if (best->diverged) {
        err_of(ctx) << "error: " << to_string(variant) << ": " << best->divergence_message << '\n';
        status = kExitDiverged;
        continue;
      }
      const auto hit = first_below(best->trace.rows, base.threshold);
      out_of(ctx) << to_string(variant) << ": nu=" << format_double(best_nu) << " trace=" << path
                  << " first_below=" << (hit ? std::to_string(*hit) : std::string("not reached")) << '\n';
    }
    return status;
  } catch (const Error& e) {
    err_of(ctx) << "error: " << e.what() << '\n';
    return kExitUsage;
  }
}

}  // namespace spb::runner
