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
#include <optional>
#include <vector>

#include "spbilevel/problem.hpp"
#include "spbilevel/sets.hpp"

namespace spb::bench {

/// Robust multi-task linear regression:
///
///   min_{||x||_1 <= Q, lambda in [0,1]^T} max_{eta in simplex_T}
///       sum_i eta_i l_i(y_i*; D_i^val)
///   y_i* = argmin_{y_i} l_i(lambda_i y_i + (1 - lambda_i) x; D_i^tr) + reg_rho/2 ||y_i||^2
///
/// with l_i(u; D) = ||A u - b||^2 / (2 n_rows).

struct TaskData {
  Mat a_train;
  Vec b_train;
  Mat a_val;
  Vec b_val;
};

enum class LipschitzBound {
  kFrobenius,  // reg_rho + max_i ||A_i||_F^2 / n_i  (upper bound, default)
  kSpectral,   // reg_rho + max_i lambda_max(A_i'A_i) / n_i  (exact, dense eigensolve)
};

struct MtlConfig {
  int num_tasks = 5;
  double reg_rho = 0.1;
  double l1_radius = 10.0;
  double split_frac = 0.75;
  std::uint64_t seed = 1;
  double noise_std = 0.1;
  LipschitzBound lipschitz = LipschitzBound::kFrobenius;

  void validate() const;
};

struct MtlDataset {
  std::vector<TaskData> tasks;
  Index d = 0;

  void validate() const;
};

/// Seeded shuffle of rows, contiguous even split into T tasks (remainder to
/// the last task), first ceil(split_frac * n_i) rows of each task for
/// training. Requires rows >= 4 T.
MtlDataset partition_tasks(const Mat& features, const Vec& labels, const MtlConfig& cfg);

struct GroundTruth {
  Vec x;       // shared coefficients, length d
  Mat y;       // task coefficients, d x T (column i is task i)
  Vec lambda;  // mixing weights in [0, 1], length T
};

struct SyntheticData {
  MtlDataset dataset;
  GroundTruth truth;
  Mat features;  // all n rows in generation order
  Vec labels;
};

/// Standard-normal features and coefficients, lambda ~ U[0, 1], labels
/// b = A (lambda_i y_i + (1 - lambda_i) x) + N(0, noise_std^2), then
/// partition_tasks. `lambda_override` replaces the sampled lambda.
SyntheticData gen_synthetic(Index n, Index d, const MtlConfig& cfg,
                            const std::optional<Vec>& lambda_override = std::nullopt);

struct MtlProblem {
  SpBilevelProblem problem;
  SetSpec set_x;  // L1Ball(Q) on x  x  Box[0,1]^T on lambda
  SetSpec set_y;  // Simplex(T) on eta
};

/// Variables: outer x_full = (x, lambda) in R^{d+T}, inner theta = [y_1..y_T]
/// in R^{dT}, dual eta in R^T. All oracles are closed form.
MtlProblem build_mtl_problem(const MtlDataset& ds, const MtlConfig& cfg);

/// Per-task dense SPD solve of
///   (lambda_i^2 G_i + reg_rho I) y_i = lambda_i (c_i - (1 - lambda_i) G_i x)
/// with G_i = A_i'A_i / n_i, c_i = A_i'b_i / n_i on the training split.
Vec exact_lower_solution(const MtlDataset& ds, const Vec& x, const Vec& lambda, double reg_rho);

/// Validation loss of each task at the given task coefficients (d x T).
Vec validation_losses(const MtlDataset& ds, const Mat& y);

}  // namespace spb::bench
