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

#include "spbilevel/runner/trace.hpp"

#include <fstream>
#include <sstream>

#include "spbilevel/errors.hpp"
#include "spbilevel/runner/config.hpp"

namespace spb::runner {

namespace {

constexpr const char* kColumns[] = {"iter",        "gap_x",          "gap_y",
                                    "gap_z",       "phi_surrogate",  "step_norm_x",
                                    "step_norm_y", "lower_residual", "adjoint_residual",
                                    "wall_ms"};
constexpr std::size_t kNumColumns = sizeof(kColumns) / sizeof(kColumns[0]);

[[noreturn]] void fail(const std::filesystem::path& path, int line, const std::string& what) {
  throw ParseError(path.string() + ": line " + std::to_string(line) + ": " + what);
}

}  // namespace

std::optional<std::string> TraceFile::get(const std::string& key) const {
  for (const auto& [k, v] : header) {
    if (k == key) return v;
  }
  return std::nullopt;
}

void TraceFile::set(const std::string& key, const std::string& value) {
  for (auto& [k, v] : header) {
    if (k == key) {
      v = value;
      return;
    }
  }
  header.emplace_back(key, value);
}

std::string trace_columns() {
  std::string out;
  for (std::size_t i = 0; i < kNumColumns; ++i) out += (i ? "," : "") + std::string(kColumns[i]);
  return out;
}

std::string format_row_body(const TraceRow& r) {
  std::ostringstream out;
  out << r.iter << ',' << format_double(r.gap_x) << ',' << format_double(r.gap_y) << ','
      << format_double(r.gap_z) << ',' << format_double(r.phi_surrogate) << ','
      << format_double(r.step_norm_x) << ',' << format_double(r.step_norm_y) << ','
      << format_double(r.lower_residual) << ',' << format_double(r.adjoint_residual);
  return out.str();
}

std::string format_row(const TraceRow& r) {
  char wall[32];
  std::snprintf(wall, sizeof wall, "%.3f", r.wall_ms);
  return format_row_body(r) + ',' + wall;
}

void write_trace(const std::filesystem::path& path, const TraceFile& trace) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write trace file '" + path.string() + "'");
  for (const auto& [k, v] : trace.header) out << "# " << k << '=' << v << '\n';
  out << trace_columns() << '\n';
  for (const auto& row : trace.rows) out << format_row(row) << '\n';
  if (!out) throw ConfigError("write failed for trace file '" + path.string() + "'");
}

TraceFile read_trace(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open trace file '" + path.string() + "'");
  TraceFile trace;
  std::string line;
  int line_no = 0;
  bool columns_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (columns_seen) fail(path, line_no, "header line after the column row");
      std::string body = line.substr(1);
      if (!body.empty() && body[0] == ' ') body.erase(0, 1);
      const auto eq = body.find('=');
      if (eq == std::string::npos) fail(path, line_no, "header line without '='");
      trace.header.emplace_back(body.substr(0, eq), body.substr(eq + 1));
      continue;
    }
    if (!columns_seen) {
      if (line != trace_columns()) fail(path, line_no, "expected column row '" + trace_columns() + "'");
      if (trace.get("trace_version") != std::to_string(kTraceVersion)) {
        fail(path, line_no, "missing or unsupported trace_version");
      }
      columns_seen = true;
      continue;
    }
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) fields.push_back(f);
    if (fields.size() != kNumColumns) {
      fail(path, line_no, "expected " + std::to_string(kNumColumns) + " fields, got " + std::to_string(fields.size()));
    }
    double values[kNumColumns];
    for (std::size_t i = 0; i < kNumColumns; ++i) {
      char* end = nullptr;
      values[i] = std::strtod(fields[i].c_str(), &end);
      if (fields[i].empty() || end != fields[i].c_str() + fields[i].size()) {
        fail(path, line_no, "non-numeric value '" + fields[i] + "' in column " + kColumns[i]);
      }
    }
    TraceRow row;
    row.iter = static_cast<std::int64_t>(values[0]);
    if (static_cast<double>(row.iter) != values[0]) fail(path, line_no, "iter is not an integer");
    if (!trace.rows.empty() && row.iter <= trace.rows.back().iter) {
      fail(path, line_no, "iter is not strictly increasing");
    }
    row.gap_x = values[1];
    row.gap_y = values[2];
    row.gap_z = values[3];
    row.phi_surrogate = values[4];
    row.step_norm_x = values[5];
    row.step_norm_y = values[6];
    row.lower_residual = values[7];
    row.adjoint_residual = values[8];
    row.wall_ms = values[9];
    trace.rows.push_back(row);
  }
  if (!columns_seen) fail(path, line_no, "no column row");
  if (trace.rows.empty()) fail(path, line_no, "empty trace body");
  return trace;
}

std::vector<double> running_average(const std::vector<TraceRow>& rows) {
  std::vector<double> avg;
  avg.reserve(rows.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    sum += rows[i].gap_z;
    avg.push_back(sum / static_cast<double>(i + 1));
  }
  return avg;
}

std::optional<std::int64_t> first_below(const std::vector<TraceRow>& rows, double threshold) {
  const auto avg = running_average(rows);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (avg[i] < threshold) return rows[i].iter;
  }
  return std::nullopt;
}

}  // namespace spb::runner
