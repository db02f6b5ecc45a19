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

#include <filesystem>
#include <string>
#include <vector>

#include "spbilevel/types.hpp"

namespace spb::bench {

struct LabeledTable {
  Mat features;  // non-label columns in file order
  Vec labels;
  std::vector<std::string> feature_names;
};

/// Reads a comma-separated numeric file with a header row. No quoting.
/// Errors (ParseError): missing file, empty file, missing label column (the
/// message lists the available columns), non-numeric cell or wrong field
/// count (the message cites the 1-based file line).
LabeledTable load_csv(const std::filesystem::path& path, const std::string& label_column);

/// Writes features + label with a header row, %.17g formatting.
void write_csv(const std::filesystem::path& path, const Mat& features, const Vec& labels,
               const std::vector<std::string>& feature_names, const std::string& label_name);

}  // namespace spb::bench
