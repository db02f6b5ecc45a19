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

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "spbilevel/benchmark/mtl.hpp"
#include "spbilevel/benchmark/toy.hpp"
#include "spbilevel/derivative_check.hpp"
#include "spbilevel/errors.hpp"
#include "spbilevel/metrics.hpp"
#include "spbilevel/runner/commands.hpp"
#include "spbilevel/sets.hpp"
#include "spbilevel/solvers.hpp"

namespace py = pybind11;
using namespace spb;

namespace {

py::dict row_dict(const runner::TraceRow& r) {
  py::dict d;
  d["iter"] = r.iter;
  d["gap_x"] = r.gap_x;
  d["gap_y"] = r.gap_y;
  d["gap_z"] = r.gap_z;
  d["phi_surrogate"] = r.phi_surrogate;
  d["step_norm_x"] = r.step_norm_x;
  d["step_norm_y"] = r.step_norm_y;
  d["lower_residual"] = r.lower_residual;
  d["adjoint_residual"] = r.adjoint_residual;
  d["wall_ms"] = r.wall_ms;
  return d;
}

py::dict trace_dict(const runner::TraceFile& t) {
  py::dict header;
  for (const auto& [k, v] : t.header) header[py::str(k)] = v;
  py::list rows;
  for (const auto& r : t.rows) rows.append(row_dict(r));
  py::dict out;
  out["header"] = header;
  out["rows"] = rows;
  return out;
}

runner::CommandContext context(std::optional<std::string> out, std::optional<std::uint64_t> seed, bool quiet) {
  runner::CommandContext ctx;
  ctx.out = std::move(out);
  ctx.seed = seed;
  ctx.quiet = quiet;
  return ctx;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Solvers for saddle-point problems with a strongly convex lower level";

  static py::exception<Error> base_error(m, "SpbError", PyExc_RuntimeError);
  py::register_exception<ContractError>(m, "ContractError", base_error.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", base_error.ptr());
  py::register_exception<NonFiniteError>(m, "NonFiniteError", base_error.ptr());
  py::register_exception<DivergenceError>(m, "DivergenceError", base_error.ptr());
  py::register_exception<ToleranceNotMetError>(m, "ToleranceNotMetError", base_error.ptr());
  py::register_exception<CoercivityError>(m, "CoercivityError", base_error.ptr());
  py::register_exception<ParseError>(m, "ParseError", base_error.ptr());

  // problem ------------------------------------------------------------------
  py::class_<Dims>(m, "Dims")
      .def(py::init([](Index n_x, Index d_y, Index m_theta) { return Dims{n_x, d_y, m_theta}; }), py::arg("n_x"),
           py::arg("d_y"), py::arg("m_theta"))
      .def_readwrite("n_x", &Dims::n_x)
      .def_readwrite("d_y", &Dims::d_y)
      .def_readwrite("m_theta", &Dims::m_theta);

  py::class_<SmoothnessConstants>(m, "SmoothnessConstants")
      .def(py::init([](double mu_g, double L_g, bool linear_in_y, double L_yy_phi) {
             return SmoothnessConstants{mu_g, L_g, linear_in_y, L_yy_phi};
           }),
           py::arg("mu_g"), py::arg("L_g"), py::arg("linear_in_y") = false, py::arg("L_yy_phi") = 0.0)
      .def_readwrite("mu_g", &SmoothnessConstants::mu_g)
      .def_readwrite("L_g", &SmoothnessConstants::L_g)
      .def_readwrite("linear_in_y", &SmoothnessConstants::linear_in_y)
      .def_readwrite("L_yy_phi", &SmoothnessConstants::L_yy_phi)
      .def_property_readonly("kappa_g", &SmoothnessConstants::kappa_g);

  py::class_<SpBilevelProblem>(m, "Problem")
      .def(py::init<>())
      .def_readwrite("dims", &SpBilevelProblem::dims)
      .def_readwrite("constants", &SpBilevelProblem::constants)
      .def_readwrite("phi", &SpBilevelProblem::phi)
      .def_readwrite("grad_phi_x", &SpBilevelProblem::grad_phi_x)
      .def_readwrite("grad_phi_theta", &SpBilevelProblem::grad_phi_theta)
      .def_readwrite("grad_phi_y", &SpBilevelProblem::grad_phi_y)
      .def_readwrite("g_val", &SpBilevelProblem::g_val)
      .def_readwrite("grad_g_theta", &SpBilevelProblem::grad_g_theta)
      .def_readwrite("hvp_g_thetatheta", &SpBilevelProblem::hvp_g_thetatheta)
      .def_readwrite("jvp_g_thetax", &SpBilevelProblem::jvp_g_thetax)
      .def("validate", &SpBilevelProblem::validate);

  // sets ---------------------------------------------------------------------
  py::class_<SetSpec>(m, "SetSpec")
      .def_static("l1_ball", &SetSpec::l1_ball, py::arg("dim"), py::arg("radius"))
      .def_static("simplex", &SetSpec::simplex, py::arg("dim"))
      .def_static("box", py::overload_cast<Vec, Vec>(&SetSpec::box), py::arg("lo"), py::arg("hi"))
      .def_static("box_uniform", py::overload_cast<Index, double, double>(&SetSpec::box), py::arg("dim"),
                  py::arg("lo"), py::arg("hi"))
      .def_static("ball2", &SetSpec::ball2, py::arg("center"), py::arg("radius"))
      .def_static("product", &SetSpec::product, py::arg("factors"))
      .def_property_readonly("dim", &SetSpec::dim)
      .def_property_readonly("diameter", &SetSpec::diameter)
      .def("lmo", &SetSpec::lmo, py::arg("c"))
      .def("project", &SetSpec::project, py::arg("p"))
      .def("distance", &SetSpec::distance, py::arg("p"))
      .def("contains", &SetSpec::contains, py::arg("p"), py::arg("tol") = 0.0)
      .def("__repr__", &SetSpec::describe);

  // solvers ------------------------------------------------------------------
  py::enum_<Variant>(m, "Variant").value("OPF", Variant::kOpf).value("FP", Variant::kFp);
  m.def("parse_variant", &parse_variant);

  py::class_<SolverConfig>(m, "SolverConfig")
      .def(py::init<>())
      .def_readwrite("variant", &SolverConfig::variant)
      .def_readwrite("K", &SolverConfig::K)
      .def_readwrite("gamma", &SolverConfig::gamma)
      .def_readwrite("sigma", &SolverConfig::sigma)
      .def_readwrite("tau", &SolverConfig::tau)
      .def_readwrite("eta", &SolverConfig::eta)
      .def_readwrite("alpha", &SolverConfig::alpha)
      .def_readwrite("mu", &SolverConfig::mu)
      .def_readwrite("x0", &SolverConfig::x0)
      .def_readwrite("y0", &SolverConfig::y0)
      .def_readwrite("theta0", &SolverConfig::theta0)
      .def_readwrite("w0", &SolverConfig::w0)
      .def_readwrite("eval_every", &SolverConfig::eval_every)
      .def("validate", &SolverConfig::validate, py::arg("problem"), py::arg("set_x"), py::arg("set_y"));

  py::class_<IterateState>(m, "IterateState")
      .def_readonly("k", &IterateState::k)
      .def_readonly("x", &IterateState::x)
      .def_readonly("y", &IterateState::y)
      .def_readonly("theta", &IterateState::theta)
      .def_readonly("w", &IterateState::w);

  py::class_<StepDiagnostics>(m, "StepDiagnostics")
      .def_readonly("g_x", &StepDiagnostics::g_x)
      .def_readonly("g_y", &StepDiagnostics::g_y)
      .def_readonly("s", &StepDiagnostics::s)
      .def_readonly("step_norm_x", &StepDiagnostics::step_norm_x)
      .def_readonly("step_norm_y", &StepDiagnostics::step_norm_y)
      .def_readonly("phi_surrogate", &StepDiagnostics::phi_surrogate);

  py::class_<Trace>(m, "Trace")
      .def_readonly("steps", &Trace::steps)
      .def_readonly("final_state", &Trace::final_state);

  m.def(
      "run",
      [](const SpBilevelProblem& p, const SetSpec& sx, const SetSpec& sy, const SolverConfig& cfg, bool keep_steps) {
        RunOptions options;
        options.keep_steps = keep_steps;
        return run(p, sx, sy, cfg, {}, options);
      },
      py::arg("problem"), py::arg("set_x"), py::arg("set_y"), py::arg("config"), py::arg("keep_steps") = true);

  py::class_<ScheduleFragment>(m, "ScheduleFragment")
      .def_readonly("gamma", &ScheduleFragment::gamma)
      .def_readonly("mu", &ScheduleFragment::mu)
      .def_readonly("sigma", &ScheduleFragment::sigma)
      .def_readonly("alpha", &ScheduleFragment::alpha)
      .def_readonly("eta", &ScheduleFragment::eta)
      .def_readonly("tau", &ScheduleFragment::tau)
      .def("apply_to", &ScheduleFragment::apply_to);
  m.def("schedule_experiment", &schedule_experiment, py::arg("variant"), py::arg("K"), py::arg("nu"),
        py::arg("constants"));
  m.def("schedule_theory", &schedule_theory, py::arg("variant"), py::arg("K"), py::arg("constants"));

  py::class_<TheoryConstants>(m, "TheoryConstants")
      .def_readonly("beta", &TheoryConstants::beta)
      .def_readonly("rho", &TheoryConstants::rho)
      .def_readonly("rho_d", &TheoryConstants::rho_d)
      .def_readonly("kappa_g", &TheoryConstants::kappa_g);
  m.def("theory_constants", &theory_constants, py::arg("constants"), py::arg("eta"), py::arg("mu"));

  // metrics ------------------------------------------------------------------
  py::class_<ImplicitGradients>(m, "ImplicitGradients")
      .def_readonly("theta_star", &ImplicitGradients::theta_star)
      .def_readonly("v", &ImplicitGradients::v)
      .def_readonly("grad_x", &ImplicitGradients::grad_x)
      .def_readonly("grad_y", &ImplicitGradients::grad_y)
      .def_readonly("lower_residual", &ImplicitGradients::lower_residual)
      .def_readonly("adjoint_residual", &ImplicitGradients::adjoint_residual);
  m.def(
      "implicit_gradients",
      [](const SpBilevelProblem& p, const Vec& x, const Vec& y, double tol) {
        GradientOptions o;
        o.lower.tol = tol;
        o.adjoint.tol = tol;
        return implicit_gradients(p, x, y, o);
      },
      py::arg("problem"), py::arg("x"), py::arg("y"), py::arg("tol") = 1e-9);

  py::enum_<GapMode>(m, "GapMode").value("LMO", GapMode::kLmo).value("PROJ", GapMode::kProj);
  py::class_<GapReport>(m, "GapReport")
      .def_readonly("gap_x", &GapReport::gap_x)
      .def_readonly("gap_y", &GapReport::gap_y)
      .def_readonly("gap_z", &GapReport::gap_z)
      .def_readonly("mode", &GapReport::mode)
      .def_readonly("sigma_used", &GapReport::sigma_used)
      .def_readonly("tau_used", &GapReport::tau_used)
      .def_readonly("stale", &GapReport::stale)
      .def("is_stationary", &GapReport::is_stationary, py::arg("epsilon"));
  m.def(
      "gap_report",
      [](const SpBilevelProblem& p, const SetSpec& sx, const SetSpec& sy, const Vec& x, const Vec& y, GapMode mode,
         double sigma, double tau, double tol) {
        GapOptions o;
        o.mode = mode;
        o.sigma = sigma;
        o.tau = tau;
        o.gradients.lower.tol = tol;
        o.gradients.adjoint.tol = tol;
        return gap_report(p, sx, sy, x, y, o);
      },
      py::arg("problem"), py::arg("set_x"), py::arg("set_y"), py::arg("x"), py::arg("y"),
      py::arg("mode") = GapMode::kLmo, py::arg("sigma") = 1.0, py::arg("tau") = 1.0, py::arg("tol") = 1e-9);

  py::class_<CheckReport>(m, "CheckReport")
      .def_property_readonly("passed", &CheckReport::passed)
      .def("table", &CheckReport::table)
      .def("errors", [](const CheckReport& r) {
        py::dict d;
        for (const auto& e : r.entries) d[py::str(e.name)] = e.max_error;
        return d;
      });
  m.def("check_gradients",
        [](const SpBilevelProblem& p, const Vec& x, const Vec& theta, const Vec& y) {
          return check_gradients(p, x, theta, y);
        });
  m.def("check_hvp", [](const SpBilevelProblem& p, const Vec& x, const Vec& theta) { return check_hvp(p, x, theta); });

  // benchmarks ---------------------------------------------------------------
  py::class_<bench::ToyClosedForms>(m, "ToyClosedForms")
      .def("theta_star", &bench::ToyClosedForms::theta_star)
      .def("adjoint", &bench::ToyClosedForms::adjoint)
      .def("grad_x", &bench::ToyClosedForms::grad_x)
      .def("grad_y", &bench::ToyClosedForms::grad_y);
  py::class_<bench::ToyQuadratic>(m, "ToyQuadratic")
      .def_readonly("problem", &bench::ToyQuadratic::problem)
      .def_readonly("set_x", &bench::ToyQuadratic::set_x)
      .def_readonly("set_y", &bench::ToyQuadratic::set_y)
      .def_readonly("closed", &bench::ToyQuadratic::closed);
  m.def("toy_quadratic", py::overload_cast<std::uint64_t, Index, Index, Index>(&bench::toy_quadratic),
        py::arg("seed"), py::arg("n_x") = 4, py::arg("m_theta") = 3, py::arg("d_y") = 3);
  m.def("toy_saddle", [](const bench::ToyQuadratic& toy) -> std::optional<std::pair<Vec, Vec>> {
    auto s = bench::toy_saddle(toy);
    if (!s) return std::nullopt;
    return std::make_pair(s->x, s->y);
  });

  py::class_<bench::MtlConfig>(m, "MtlConfig")
      .def(py::init<>())
      .def_readwrite("num_tasks", &bench::MtlConfig::num_tasks)
      .def_readwrite("reg_rho", &bench::MtlConfig::reg_rho)
      .def_readwrite("l1_radius", &bench::MtlConfig::l1_radius)
      .def_readwrite("split_frac", &bench::MtlConfig::split_frac)
      .def_readwrite("seed", &bench::MtlConfig::seed)
      .def_readwrite("noise_std", &bench::MtlConfig::noise_std);
  py::class_<bench::MtlDataset>(m, "MtlDataset").def_readonly("d", &bench::MtlDataset::d).def_property_readonly(
      "num_tasks", [](const bench::MtlDataset& ds) { return ds.tasks.size(); });
  py::class_<bench::MtlProblem>(m, "MtlProblem")
      .def_readonly("problem", &bench::MtlProblem::problem)
      .def_readonly("set_x", &bench::MtlProblem::set_x)
      .def_readonly("set_y", &bench::MtlProblem::set_y);
  m.def(
      "gen_synthetic", [](Index n, Index d, const bench::MtlConfig& cfg) { return bench::gen_synthetic(n, d, cfg).dataset; },
      py::arg("n"), py::arg("d"), py::arg("config"));
  m.def("build_mtl_problem", &bench::build_mtl_problem, py::arg("dataset"), py::arg("config"));
  m.def("exact_lower_solution", &bench::exact_lower_solution, py::arg("dataset"), py::arg("x"), py::arg("lam"),
        py::arg("reg_rho"));

  // runner -------------------------------------------------------------------
  m.def(
      "run_config",
      [](const std::map<std::string, std::string>& pairs) {
        const auto cfg = runner::RunConfig::from_pairs(pairs);
        cfg.validate();
        const auto outcome = runner::execute_run(cfg, runner::build_instance(cfg));
        return trace_dict(outcome.trace);
      },
      py::arg("pairs"), "Runs a key=value config in memory and returns {'header': ..., 'rows': [...]}.");
  m.def("read_trace", [](const std::filesystem::path& p) { return trace_dict(runner::read_trace(p)); });
  m.def(
      "cmd_run",
      [](const std::filesystem::path& cfg, std::optional<std::string> out, std::optional<std::uint64_t> seed,
         bool quiet) { return runner::cmd_run(cfg, context(std::move(out), seed, quiet)); },
      py::arg("config"), py::arg("out") = py::none(), py::arg("seed") = py::none(), py::arg("quiet") = true);
  m.def(
      "cmd_check",
      [](const std::filesystem::path& cfg, bool quiet) { return runner::cmd_check(cfg, context({}, {}, quiet)); },
      py::arg("config"), py::arg("quiet") = true);
  m.def(
      "cmd_datagen",
      [](const std::filesystem::path& cfg, std::optional<std::string> out, bool quiet) {
        return runner::cmd_datagen(cfg, context(std::move(out), {}, quiet));
      },
      py::arg("config"), py::arg("out") = py::none(), py::arg("quiet") = true);
  m.def(
      "cmd_plot",
      [](const std::vector<std::filesystem::path>& traces, const std::filesystem::path& out, bool quiet) {
        return runner::cmd_plot(traces, out, context({}, {}, quiet));
      },
      py::arg("traces"), py::arg("out"), py::arg("quiet") = true);
  m.def(
      "cmd_compare",
      [](const std::filesystem::path& cfg, std::optional<std::string> out, bool quiet) {
        return runner::cmd_compare(cfg, context(std::move(out), {}, quiet));
      },
      py::arg("config"), py::arg("out") = py::none(), py::arg("quiet") = true);

  m.attr("__version__") = runner::kLibraryVersion;
}
