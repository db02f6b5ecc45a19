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
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace spb::runner {

inline constexpr const char* kLibraryVersion = "0.1.0";
inline constexpr int kTraceVersion = 1;

struct TraceRow {
  std::int64_t iter = 0;
  double gap_x = 0.0;
  double gap_y = 0.0;
  double gap_z = 0.0;
  double phi_surrogate = 0.0;
  double step_norm_x = 0.0;
  double step_norm_y = 0.0;
  double lower_residual = 0.0;
  double adjoint_residual = 0.0;
  double wall_ms = 0.0;
};

/// Ordered '#'-prefixed key=value header followed by a CSV body.
struct TraceFile {
  std::vector<std::pair<std::string, std::string>> header;
  std::vector<TraceRow> rows;

  std::optional<std::string> get(const std::string& key) const;
  void set(const std::string& key, const std::string& value);
};

std::string trace_columns();
std::string format_row(const TraceRow& row);
/// The row without wall_ms; used for determinism comparisons.
std::string format_row_body(const TraceRow& row);

void write_trace(const std::filesystem::path& path, const TraceFile& trace);

/// Throws ParseError citing the 1-based line on malformed input, a missing
/// trace_version, a wrong column set, non-increasing iter or an empty body.
TraceFile read_trace(const std::filesystem::path& path);

/// Cumulative mean of gap_z over the rows.
std::vector<double> running_average(const std::vector<TraceRow>& rows);

/// iter of the first row whose running-average gap_z is strictly below the
/// threshold.
std::optional<std::int64_t> first_below(const std::vector<TraceRow>& rows, double threshold);

}  // namespace spb::runner
