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

#include "spbilevel/benchmark/csv.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace spb::bench {

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

bool parse_double(const std::string& text, double& value) {
  if (text.empty()) return false;
  errno = 0;
  char* end = nullptr;
  value = std::strtod(text.c_str(), &end);
  return errno == 0 && end == text.c_str() + text.size() && std::isfinite(value);
}

}  // namespace

LabeledTable load_csv(const std::filesystem::path& path, const std::string& label_column) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open CSV file '" + path.string() + "'");

  std::string line;
  if (!std::getline(in, line) || trim(line).empty()) {
    throw ParseError("CSV file '" + path.string() + "' is empty");
  }
  std::vector<std::string> header = split(line);
  for (auto& h : header) h = trim(h);

  std::ptrdiff_t label_idx = -1;
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == label_column) label_idx = static_cast<std::ptrdiff_t>(i);
  if (label_idx < 0) {
    std::string available;
    for (std::size_t i = 0; i < header.size(); ++i) available += (i ? ", " : "") + header[i];
    throw ParseError("label column '" + label_column + "' not found; available columns: " + available);
  }

  LabeledTable table;
  for (std::size_t i = 0; i < header.size(); ++i)
    if (static_cast<std::ptrdiff_t>(i) != label_idx) table.feature_names.push_back(header[i]);

  std::vector<std::vector<double>> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split(line);
    if (cells.size() != header.size()) {
      throw ParseError("row " + std::to_string(line_no) + ": expected " + std::to_string(header.size()) +
                       " fields, got " + std::to_string(cells.size()));
    }
    std::vector<double> values(cells.size());
    for (std::size_t j = 0; j < cells.size(); ++j) {
      if (!parse_double(trim(cells[j]), values[j])) {
        throw ParseError("row " + std::to_string(line_no) + ": non-numeric cell '" + cells[j] +
                         "' in column '" + header[j] + "'");
      }
    }
    rows.push_back(std::move(values));
  }
  if (rows.empty()) throw ParseError("CSV file '" + path.string() + "' has no data rows");

  const auto n = static_cast<Index>(rows.size());
  const auto d = static_cast<Index>(header.size()) - 1;
  table.features.resize(n, d);
  table.labels.resize(n);
  for (Index r = 0; r < n; ++r) {
    Index c = 0;
    for (std::size_t j = 0; j < header.size(); ++j) {
      if (static_cast<std::ptrdiff_t>(j) == label_idx) {
        table.labels[r] = rows[r][j];
      } else {
        table.features(r, c++) = rows[r][j];
      }
    }
  }
  return table;
}

void write_csv(const std::filesystem::path& path, const Mat& features, const Vec& labels,
               const std::vector<std::string>& feature_names, const std::string& label_name) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write '" + path.string() + "'");
  for (const auto& name : feature_names) out << name << ',';
  out << label_name << '\n';
  char buf[32];
  for (Index r = 0; r < features.rows(); ++r) {
    for (Index c = 0; c < features.cols(); ++c) {
      std::snprintf(buf, sizeof buf, "%.17g", features(r, c));
      out << buf << ',';
    }
    std::snprintf(buf, sizeof buf, "%.17g", labels[r]);
    out << buf << '\n';
  }
}

}  // namespace spb::bench
