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

#include "spbilevel/runner/config.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>

namespace spb::runner {

std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double to_double(const std::string& key, const std::string& text) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (text.empty() || errno != 0 || end != text.c_str() + text.size() || !std::isfinite(v)) {
    throw ConfigError("config key '" + key + "': expected a number, got '" + text + "'");
  }
  return v;
}

std::int64_t to_int(const std::string& key, const std::string& text) {
  errno = 0;
  char* end = nullptr;
  const long long v = std::strtoll(text.c_str(), &end, 10);
  if (text.empty() || errno != 0 || end != text.c_str() + text.size()) {
    // accept integral values written in float notation, e.g. 1e4
    const double d = to_double(key, text);
    if (d != std::floor(d) || std::abs(d) > 9.0e15) {
      throw ConfigError("config key '" + key + "': expected an integer, got '" + text + "'");
    }
    return static_cast<std::int64_t>(d);
  }
  return v;
}

std::vector<double> to_list(const std::string& key, const std::string& text) {
  std::vector<double> out;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(to_double(key, item));
  }
  return out;
}

Vec to_vec(const std::string& key, const std::string& text) {
  const auto values = to_list(key, text);
  if (values.empty()) throw ConfigError("config key '" + key + "': empty vector");
  return Eigen::Map<const Vec>(values.data(), static_cast<Index>(values.size()));
}

std::string list_string(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + format_double(v[i]);
  return out;
}

std::string vec_string(const Vec& v) {
  return list_string(std::vector<double>(v.data(), v.data() + v.size()));
}

ProblemKind parse_problem(const std::string& s) {
  if (s == "toy-quadratic") return ProblemKind::kToyQuadratic;
  if (s == "mtl-synthetic") return ProblemKind::kMtlSynthetic;
  if (s == "mtl-csv") return ProblemKind::kMtlCsv;
  throw ConfigError("unknown problem '" + s + "' (valid: toy-quadratic, mtl-synthetic, mtl-csv)");
}

ScheduleSource parse_schedule(const std::string& s) {
  if (s == "experiment") return ScheduleSource::kExperiment;
  if (s == "theory") return ScheduleSource::kTheory;
  if (s == "explicit") return ScheduleSource::kExplicit;
  throw ConfigError("unknown schedule '" + s + "' (valid: experiment, theory, explicit)");
}

GapModeSetting parse_gap_mode(const std::string& s) {
  if (s == "lmo") return GapModeSetting::kLmo;
  if (s == "proj") return GapModeSetting::kProj;
  if (s == "auto") return GapModeSetting::kAuto;
  if (s == "lmo-both") return GapModeSetting::kLmoBoth;
  throw ConfigError("unknown gap_mode '" + s + "' (valid: lmo, proj, auto, lmo-both)");
}

bench::LipschitzBound parse_lipschitz(const std::string& s) {
  if (s == "frobenius") return bench::LipschitzBound::kFrobenius;
  if (s == "spectral") return bench::LipschitzBound::kSpectral;
  throw ConfigError("unknown lipschitz bound '" + s + "' (valid: frobenius, spectral)");
}

std::string to_string(bench::LipschitzBound b) {
  return b == bench::LipschitzBound::kFrobenius ? "frobenius" : "spectral";
}

Variant parse_solver(const std::string& s) {
  try {
    return parse_variant(s);
  } catch (const ConfigError&) {
    throw ConfigError("unknown solver '" + s + "' (valid: opf, fp)");
  }
}

using Setter = std::function<void(RunConfig&, const std::string& key, const std::string& value)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = [] {
    std::map<std::string, Setter> t;
    auto dbl = [](double RunConfig::*field) {
      return [field](RunConfig& c, const std::string& k, const std::string& v) { c.*field = to_double(k, v); };
    };
    auto idx = [](Index RunConfig::*field) {
      return [field](RunConfig& c, const std::string& k, const std::string& v) { c.*field = to_int(k, v); };
    };
    auto i64 = [](std::int64_t RunConfig::*field) {
      return [field](RunConfig& c, const std::string& k, const std::string& v) { c.*field = to_int(k, v); };
    };
    auto opt = [](std::optional<double> RunConfig::*field) {
      return [field](RunConfig& c, const std::string& k, const std::string& v) {
        if (v == "none" || v.empty()) {
          c.*field = std::nullopt;
        } else {
          c.*field = to_double(k, v);
        }
      };
    };
    auto optvec = [](std::optional<Vec> RunConfig::*field) {
      return [field](RunConfig& c, const std::string& k, const std::string& v) {
        if (v == "none" || v.empty()) {
          c.*field = std::nullopt;
        } else {
          c.*field = to_vec(k, v);
        }
      };
    };
    t["problem"] = [](RunConfig& c, const std::string&, const std::string& v) { c.problem = parse_problem(v); };
    t["seed"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.seed = static_cast<std::uint64_t>(to_int(k, v));
    };
    t["toy_n_x"] = idx(&RunConfig::toy_n_x);
    t["toy_m_theta"] = idx(&RunConfig::toy_m_theta);
    t["toy_d_y"] = idx(&RunConfig::toy_d_y);
    t["toy_mu_g"] = dbl(&RunConfig::toy_mu_g);
    t["toy_L_g"] = dbl(&RunConfig::toy_L_g);
    t["mtl_n"] = idx(&RunConfig::mtl_n);
    t["mtl_d"] = idx(&RunConfig::mtl_d);
    t["num_tasks"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.num_tasks = static_cast<int>(to_int(k, v));
    };
    t["reg_rho"] = dbl(&RunConfig::reg_rho);
    t["l1_radius"] = dbl(&RunConfig::l1_radius);
    t["split_frac"] = dbl(&RunConfig::split_frac);
    t["noise_std"] = dbl(&RunConfig::noise_std);
    t["lipschitz"] = [](RunConfig& c, const std::string&, const std::string& v) { c.lipschitz = parse_lipschitz(v); };
    t["csv_path"] = [](RunConfig& c, const std::string&, const std::string& v) { c.csv_path = v; };
    t["label_column"] = [](RunConfig& c, const std::string&, const std::string& v) { c.label_column = v; };
    t["solver"] = [](RunConfig& c, const std::string&, const std::string& v) { c.solver = parse_solver(v); };
    t["schedule"] = [](RunConfig& c, const std::string&, const std::string& v) { c.schedule = parse_schedule(v); };
    t["nu"] = dbl(&RunConfig::nu);
    t["nu_sweep"] = [](RunConfig& c, const std::string& k, const std::string& v) {
      c.nu_sweep = (v == "none") ? std::vector<double>{} : to_list(k, v);
    };
    t["K"] = i64(&RunConfig::K);
    t["eval_every"] = i64(&RunConfig::eval_every);
    t["gap_mode"] = [](RunConfig& c, const std::string&, const std::string& v) { c.gap_mode = parse_gap_mode(v); };
    t["gap_tau"] = dbl(&RunConfig::gap_tau);
    t["gap_sigma"] = opt(&RunConfig::gap_sigma);
    t["tol_lower"] = dbl(&RunConfig::tol_lower);
    t["tol_adjoint"] = dbl(&RunConfig::tol_adjoint);
    t["max_inner_iter"] = i64(&RunConfig::max_inner_iter);
    t["threshold"] = dbl(&RunConfig::threshold);
    t["gamma"] = opt(&RunConfig::gamma);
    t["sigma"] = opt(&RunConfig::sigma);
    t["tau"] = opt(&RunConfig::tau);
    t["mu"] = opt(&RunConfig::mu);
    t["eta"] = opt(&RunConfig::eta);
    t["alpha"] = opt(&RunConfig::alpha);
    t["x0"] = optvec(&RunConfig::x0);
    t["y0"] = optvec(&RunConfig::y0);
    t["theta0"] = optvec(&RunConfig::theta0);
    t["output"] = [](RunConfig& c, const std::string&, const std::string& v) { c.output = v; };
    t["label"] = [](RunConfig& c, const std::string&, const std::string& v) { c.label = v; };
    return t;
  }();
  return table;
}

}  // namespace

std::string to_string(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::kToyQuadratic:
      return "toy-quadratic";
    case ProblemKind::kMtlSynthetic:
      return "mtl-synthetic";
    case ProblemKind::kMtlCsv:
      return "mtl-csv";
  }
  return "?";
}

std::string to_string(ScheduleSource source) {
  switch (source) {
    case ScheduleSource::kExperiment:
      return "experiment";
    case ScheduleSource::kTheory:
      return "theory";
    case ScheduleSource::kExplicit:
      return "explicit";
  }
  return "?";
}

std::string to_string(GapModeSetting mode) {
  switch (mode) {
    case GapModeSetting::kLmo:
      return "lmo";
    case GapModeSetting::kProj:
      return "proj";
    case GapModeSetting::kAuto:
      return "auto";
    case GapModeSetting::kLmoBoth:
      return "lmo-both";
  }
  return "?";
}

GapMode resolve_gap_mode(GapModeSetting setting, Variant variant) {
  switch (setting) {
    case GapModeSetting::kLmo:
    case GapModeSetting::kLmoBoth:
      return GapMode::kLmo;
    case GapModeSetting::kProj:
      return GapMode::kProj;
    case GapModeSetting::kAuto:
      break;
  }
  return variant == Variant::kOpf ? GapMode::kLmo : GapMode::kProj;
}

std::map<std::string, std::string> parse_pairs(std::istream& in) {
  std::map<std::string, std::string> pairs;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key=value, got '" + t + "'");
    }
    pairs[trim(t.substr(0, eq))] = trim(t.substr(eq + 1));
  }
  return pairs;
}

RunConfig RunConfig::from_pairs(const std::map<std::string, std::string>& pairs) {
  RunConfig cfg;
  const auto& table = setters();
  for (const auto& [key, value] : pairs) {
    const auto it = table.find(key);
    if (it == table.end()) throw ConfigError("unknown config key '" + key + "'");
    it->second(cfg, key, value);
  }
  return cfg;
}

std::vector<std::pair<std::string, std::string>> RunConfig::to_pairs() const {
  auto opt = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string("none"); };
  auto optvec = [](const std::optional<Vec>& v) { return v ? vec_string(*v) : std::string("none"); };
  return {
      {"problem", to_string(problem)},
      {"seed", std::to_string(seed)},
      {"toy_n_x", std::to_string(toy_n_x)},
      {"toy_m_theta", std::to_string(toy_m_theta)},
      {"toy_d_y", std::to_string(toy_d_y)},
      {"toy_mu_g", format_double(toy_mu_g)},
      {"toy_L_g", format_double(toy_L_g)},
      {"mtl_n", std::to_string(mtl_n)},
      {"mtl_d", std::to_string(mtl_d)},
      {"num_tasks", std::to_string(num_tasks)},
      {"reg_rho", format_double(reg_rho)},
      {"l1_radius", format_double(l1_radius)},
      {"split_frac", format_double(split_frac)},
      {"noise_std", format_double(noise_std)},
      {"lipschitz", to_string(lipschitz)},
      {"csv_path", csv_path},
      {"label_column", label_column},
      {"solver", spb::to_string(solver)},
      {"schedule", to_string(schedule)},
      {"nu", format_double(nu)},
      {"nu_sweep", nu_sweep.empty() ? std::string("none") : list_string(nu_sweep)},
      {"K", std::to_string(K)},
      {"eval_every", std::to_string(eval_every)},
      {"gap_mode", to_string(gap_mode)},
      {"gap_tau", format_double(gap_tau)},
      {"gap_sigma", opt(gap_sigma)},
      {"tol_lower", format_double(tol_lower)},
      {"tol_adjoint", format_double(tol_adjoint)},
      {"max_inner_iter", std::to_string(max_inner_iter)},
      {"threshold", format_double(threshold)},
      {"gamma", opt(gamma)},
      {"sigma", opt(sigma)},
      {"tau", opt(tau)},
      {"mu", opt(mu)},
      {"eta", opt(eta)},
      {"alpha", opt(alpha)},
      {"x0", optvec(x0)},
      {"y0", optvec(y0)},
      {"theta0", optvec(theta0)},
      {"output", output},
      {"label", label},
  };
}

void RunConfig::validate() const {
  auto require = [](bool ok, const std::string& msg) {
    if (!ok) throw ConfigError(msg);
  };
  require(K >= 1, "K must be >= 1");
  require(eval_every >= 1, "eval_every must be >= 1");
  require(nu > 0.0, "nu must be positive");
  for (double v : nu_sweep) require(v > 0.0, "nu_sweep entries must be positive");
  require(tol_lower > 0.0 && tol_adjoint > 0.0, "inner tolerances must be positive");
  require(max_inner_iter >= 1, "max_inner_iter must be >= 1");
  require(gap_tau > 0.0, "gap_tau must be positive");
  require(!gap_sigma || *gap_sigma > 0.0, "gap_sigma must be positive");
  require(threshold >= 0.0, "threshold must be nonnegative");
  if (problem == ProblemKind::kToyQuadratic) {
    require(toy_n_x >= 1 && toy_m_theta >= 1 && toy_d_y >= 1, "toy dimensions must be >= 1");
    require(toy_mu_g > 0.0 && toy_L_g >= toy_mu_g, "toy curvature needs 0 < toy_mu_g <= toy_L_g");
  } else {
    require(num_tasks >= 1, "num_tasks must be >= 1");
    require(reg_rho > 0.0, "reg_rho must be positive");
    require(l1_radius > 0.0, "l1_radius must be positive");
    require(split_frac > 0.0 && split_frac < 1.0, "split_frac must lie in (0, 1)");
    require(noise_std >= 0.0, "noise_std must be nonnegative");
    if (problem == ProblemKind::kMtlSynthetic) {
      require(mtl_d >= 1, "mtl_d must be >= 1");
      require(mtl_n >= 4 * num_tasks, "mtl_n must be at least 4 * num_tasks");
    } else {
      require(!csv_path.empty(), "mtl-csv requires csv_path");
    }
  }
  if (schedule == ScheduleSource::kExplicit) {
    require(gamma && sigma && mu && eta && alpha, "explicit schedule requires gamma, sigma, mu, eta and alpha");
    require(solver != Variant::kFp || tau.has_value(), "explicit schedule for fp requires tau");
  }
}

bench::MtlConfig RunConfig::mtl_config() const {
  bench::MtlConfig m;
  m.num_tasks = num_tasks;
  m.reg_rho = reg_rho;
  m.l1_radius = l1_radius;
  m.split_frac = split_frac;
  m.seed = seed;
  m.noise_std = noise_std;
  m.lipschitz = lipschitz;
  return m;
}

bench::ToyOptions RunConfig::toy_options() const {
  bench::ToyOptions t;
  t.seed = seed;
  t.n_x = toy_n_x;
  t.m_theta = toy_m_theta;
  t.d_y = toy_d_y;
  t.mu_g = toy_mu_g;
  t.L_g = toy_L_g;
  return t;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  std::string first;
  std::getline(in, first);
  in.clear();
  in.seekg(0);
  if (trim(first).rfind("# trace_version=", 0) == 0) {
    // trace file: collect "# config.key=value" header lines
    std::stringstream cfg_text;
    std::string line;
    const std::string prefix = "# config.";
    while (std::getline(in, line)) {
      if (line.empty() || line[0] != '#') break;
      if (line.rfind(prefix, 0) == 0) cfg_text << line.substr(prefix.size()) << '\n';
    }
    return RunConfig::from_pairs(parse_pairs(cfg_text));
  }
  return RunConfig::from_pairs(parse_pairs(in));
}

}  // namespace spb::runner
