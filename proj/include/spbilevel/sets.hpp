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

#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "spbilevel/types.hpp"

namespace spb {

class SetSpec;

struct L1Ball {
  Index dim;
  double radius;
};

/// Probability simplex {s >= 0, sum(s) = 1}.
struct Simplex {
  Index dim;
};

struct Box {
  Vec lo;
  Vec hi;
};

struct Ball2 {
  Vec center;
  double radius;
};

struct ProductFactor {
  std::shared_ptr<const SetSpec> set;
  Index offset;  // first coordinate of the factor
  Index size;
};

/// Cartesian product; factors occupy contiguous, disjoint, ordered ranges.
struct Product {
  std::vector<ProductFactor> factors;
};

/// Immutable compact convex set with a linear minimization oracle, Euclidean
/// projection, and membership test. The diameter is computed at
/// construction.
class SetSpec {
 public:
  using Variant = std::variant<L1Ball, Simplex, Box, Ball2, Product>;

  static SetSpec l1_ball(Index dim, double radius);
  static SetSpec simplex(Index dim);
  static SetSpec box(Vec lo, Vec hi);
  static SetSpec box(Index dim, double lo, double hi);
  static SetSpec ball2(Vec center, double radius);
  /// Factors are laid out in order starting at coordinate 0.
  static SetSpec product(std::vector<SetSpec> factors);

  Index dim() const { return dim_; }
  double diameter() const { return diameter_; }
  const Variant& variant() const { return variant_; }
  std::string describe() const;

  /// A minimizer of <c, s> over the set. Extreme point for L1Ball, Simplex
  /// and Box; ties go to the lowest index. Ball2 with c = 0 returns the
  /// center.
  Vec lmo(const Vec& c) const;

  /// Euclidean projection. Points already feasible to machine precision are
  /// returned unchanged, which makes the map bitwise idempotent.
  Vec project(const Vec& p) const;

  /// True iff p is within Euclidean distance tol of the set, up to a few ulps
  /// of slack for roundoff.
  bool contains(const Vec& p, double tol = 0.0) const;

  double distance(const Vec& p) const;

 private:
  SetSpec(Variant v, Index dim, double diameter)
      : variant_(std::move(v)), dim_(dim), diameter_(diameter) {}

  Variant variant_;
  Index dim_;
  double diameter_;
};

/// Euclidean projection onto {s >= 0, sum(s) = z} by sort-and-threshold.
Vec project_scaled_simplex(const Vec& v, double z);

}  // namespace spb
