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

#include <cmath>
#include <string_view>

#include <Eigen/Core>

#include "spbilevel/errors.hpp"

namespace spb {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Index = Eigen::Index;

inline void require_dim(const Vec& v, Index expected, std::string_view name) {
  if (v.size() != expected) {
    throw ContractError(std::string(name) + ": expected dimension " + std::to_string(expected) +
                        ", got " + std::to_string(v.size()));
  }
}

inline bool all_finite(const Vec& v) { return v.allFinite(); }

}  // namespace spb
