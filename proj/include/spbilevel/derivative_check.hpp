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
#include <string>
#include <vector>

#include "spbilevel/problem.hpp"

namespace spb {

struct CheckEntry {
  std::string name;
  double max_error = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

struct CheckReport {
  std::vector<CheckEntry> entries;

  bool passed() const;
  const CheckEntry* find(const std::string& name) const;
  /// One line per entry: name, error, tolerance, PASS/FAIL.
  std::string table() const;
};

struct CheckOptions {
  double h = 1e-6;
  double tolerance = 1e-5;
  int num_directions = 10;
  std::uint64_t seed = 20240917;
};

/// Compares each analytic gradient against central differences of the value
/// oracles along seeded random unit directions. Relative error is
/// |fd - analytic| / max(1, |fd|, |analytic|).
CheckReport check_gradients(const SpBilevelProblem& problem, const Vec& x, const Vec& theta,
                            const Vec& y, const CheckOptions& options = {});

/// Compares hvp_g_thetatheta and jvp_g_thetax against central differences of
/// grad_g_theta, and probes linearity, symmetry, purity and the declared
/// [mu_g, L_g] curvature bounds of the Hessian product.
CheckReport check_hvp(const SpBilevelProblem& problem, const Vec& x, const Vec& theta,
                      const CheckOptions& options = {});

}  // namespace spb
