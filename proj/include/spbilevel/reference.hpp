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

#include <vector>

#include "spbilevel/sets.hpp"

// Brute-force reference implementations, deliberately independent of the
// algorithms in sets.cpp. Exponential in the dimension; keep d small.
namespace spb::reference {

/// All extreme points of an L1Ball, Simplex, Box or a Product of those.
/// Throws ContractError for Ball2.
std::vector<Vec> vertices(const SetSpec& set);

/// argmin over vertices(set) of <c, v>; first minimizer in enumeration order.
Vec lmo_by_enumeration(const SetSpec& set, const Vec& c);

/// Projection onto the probability simplex by enumerating every support set,
/// solving the equality-constrained problem on it, and keeping the nearest
/// feasible candidate.
Vec simplex_projection_by_supports(const Vec& p);

}  // namespace spb::reference
