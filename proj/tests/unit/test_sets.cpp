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

#include <gtest/gtest.h>

#include <cmath>

#include "fixtures.hpp"
#include "spbilevel/errors.hpp"
#include "spbilevel/reference.hpp"
#include "spbilevel/sets.hpp"

namespace spb {
namespace {

Vec v(std::initializer_list<double> xs) {
  Vec out(static_cast<Index>(xs.size()));
  Index i = 0;
  for (double x : xs) out(i++) = x;
  return out;
}

void expect_vec_eq(const Vec& a, const Vec& b, double tol = 0.0) {
  ASSERT_EQ(a.size(), b.size());
  for (Index i = 0; i < a.size(); ++i) EXPECT_NEAR(a(i), b(i), tol) << "index " << i;
}

std::vector<SetSpec> sample_sets() {
  return {
      SetSpec::l1_ball(5, 2.0),
      SetSpec::simplex(6),
      SetSpec::box(v({-1, 0, 2, -3}), v({1, 0.5, 4, -1})),
      SetSpec::ball2(v({1, -1, 0.5}), 1.5),
      SetSpec::product({SetSpec::l1_ball(3, 1.0), SetSpec::box(2, 0.0, 1.0), SetSpec::simplex(3)}),
  };
}

// --- examples ---------------------------------------------------------------

TEST(Lmo, L1BallPicksLargestMagnitude) { expect_vec_eq(SetSpec::l1_ball(2, 2.0).lmo(v({1, -3})), v({0, 2})); }

TEST(Lmo, SimplexPicksSmallestCoordinate) {
  expect_vec_eq(SetSpec::simplex(3).lmo(v({5, -1, 0})), v({0, 1, 0}));
}

TEST(Lmo, BoxFollowsSignPattern) {
  expect_vec_eq(SetSpec::box(v({0, 0}), v({1, 1})).lmo(v({-1, 2})), v({1, 0}));
}

TEST(Lmo, ProductIsFactorwise) {
  const auto set = SetSpec::product({SetSpec::l1_ball(2, 1.0), SetSpec::box(1, 0.0, 1.0)});
  expect_vec_eq(set.lmo(v({0.5, -2, 1})), v({0, 1, 0}));
}

TEST(Lmo, TiesGoToLowestIndex) {
  expect_vec_eq(SetSpec::l1_ball(3, 1.0).lmo(v({2, -2, 2})), v({-1, 0, 0}));
  expect_vec_eq(SetSpec::simplex(3).lmo(v({1, 0, 0})), v({0, 1, 0}));
}

TEST(Lmo, Ball2ZeroCostReturnsCenter) {
  const Vec c = v({1, 2});
  expect_vec_eq(SetSpec::ball2(c, 3.0).lmo(Vec::Zero(2)), c);
}

TEST(Lmo, Ball2IsBoundaryPoint) {
  const auto s = SetSpec::ball2(v({1, 2}), 3.0).lmo(v({3, 4}));
  expect_vec_eq(s, v({1 - 3 * 0.6, 2 - 3 * 0.8}), 1e-15);
}

TEST(Lmo, DimensionMismatchThrows) {
  EXPECT_THROW(SetSpec::simplex(3).lmo(Vec::Zero(2)), ContractError);
  EXPECT_THROW(SetSpec::simplex(3).project(Vec::Zero(4)), ContractError);
  EXPECT_THROW(SetSpec::simplex(3).contains(Vec::Zero(4)), ContractError);
}

TEST(Project, SimplexSymmetricPoint) {
  expect_vec_eq(SetSpec::simplex(3).project(v({0.5, 0.5, 0.5})), Vec::Constant(3, 1.0 / 3.0), 1e-15);
}

TEST(Project, SimplexClipsToVertex) { expect_vec_eq(SetSpec::simplex(3).project(v({1.2, 0, 0})), v({1, 0, 0}), 1e-15); }

// Grid oracle: the nearest point of a fine grid on the 2-simplex.
TEST(Project, SimplexAgreesWithGridSearch) {
  const Vec p = v({1.2, 0, 0});
  const int steps = 400;
  double best = INFINITY;
  Vec arg;
  for (int i = 0; i <= steps; ++i) {
    for (int j = 0; i + j <= steps; ++j) {
      const Vec q = v({double(i) / steps, double(j) / steps, double(steps - i - j) / steps});
      const double d = (q - p).squaredNorm();
      if (d < best) {
        best = d;
        arg = q;
      }
    }
  }
  expect_vec_eq(SetSpec::simplex(3).project(p), arg, 1.0 / steps);
}

TEST(Project, L1FeasiblePointUnchanged) {
  expect_vec_eq(SetSpec::l1_ball(2, 1.0).project(v({0.3, -0.2})), v({0.3, -0.2}));
}

TEST(Project, L1RestoresSigns) {
  // |p| = (2, 1) -> simplex-scaled projection onto radius 1 gives (1, 0)
  expect_vec_eq(SetSpec::l1_ball(2, 1.0).project(v({-2, 1})), v({-1, 0}), 1e-15);
}

TEST(Project, BoxClamps) {
  expect_vec_eq(SetSpec::box(3, 0.0, 1.0).project(v({-0.5, 2, 0.7})), v({0, 1, 0.7}));
}

TEST(Project, Ball2Radial) {
  expect_vec_eq(SetSpec::ball2(Vec::Zero(2), 1.0).project(v({3, 4})), v({0.6, 0.8}), 1e-15);
}

TEST(Contains, Examples) {
  EXPECT_TRUE(SetSpec::simplex(2).contains(v({0.5, 0.5}), 0.0));
  EXPECT_FALSE(SetSpec::l1_ball(2, 1.0).contains(v({0.6, 0.6}), 0.0));
  EXPECT_TRUE(SetSpec::l1_ball(2, 1.0).contains(v({0.6, 0.6}), 0.2));
  // distance is 0.2 / sqrt(2) ~ 0.1414
  EXPECT_FALSE(SetSpec::l1_ball(2, 1.0).contains(v({0.6, 0.6}), 0.14));
  EXPECT_NEAR(SetSpec::l1_ball(2, 1.0).distance(v({0.6, 0.6})), 0.1 * std::sqrt(2.0), 1e-15);
}

TEST(Diameter, ExactValues) {
  EXPECT_DOUBLE_EQ(SetSpec::l1_ball(4, 2.5).diameter(), 5.0);
  EXPECT_DOUBLE_EQ(SetSpec::simplex(5).diameter(), std::sqrt(2.0));
  EXPECT_DOUBLE_EQ(SetSpec::simplex(1).diameter(), 0.0);
  EXPECT_DOUBLE_EQ(SetSpec::box(v({0, 0}), v({3, 4})).diameter(), 5.0);
  EXPECT_DOUBLE_EQ(SetSpec::ball2(Vec::Zero(3), 1.5).diameter(), 3.0);
  const auto prod = SetSpec::product({SetSpec::l1_ball(2, 1.0), SetSpec::box(v({0, 0}), v({3, 4}))});
  EXPECT_DOUBLE_EQ(prod.diameter(), std::sqrt(4.0 + 25.0));
}

TEST(Construction, RejectsInvalidSets) {
  EXPECT_THROW(SetSpec::box(v({1}), v({0})), ContractError);
  EXPECT_THROW(SetSpec::l1_ball(2, 0.0), ContractError);
  EXPECT_THROW(SetSpec::simplex(0), ContractError);
  EXPECT_THROW(SetSpec::ball2(Vec::Zero(2), -1.0), ContractError);
  EXPECT_THROW(SetSpec::product({}), ContractError);
}

TEST(Construction, ProductLayoutIsContiguous) {
  const auto prod = SetSpec::product({SetSpec::l1_ball(2, 1.0), SetSpec::simplex(3), SetSpec::box(1, 0, 1)});
  const auto& factors = std::get<Product>(prod.variant()).factors;
  Index next = 0;
  for (const auto& f : factors) {
    EXPECT_EQ(f.offset, next);
    next += f.size;
  }
  EXPECT_EQ(next, prod.dim());
}

// --- properties -------------------------------------------------------------

TEST(SetProperties, LmoOptimality) {
  Rng rng(11);
  for (const auto& set : sample_sets()) {
    std::vector<Vec> feasible;
    for (int i = 0; i < 100; ++i) feasible.push_back(testing::random_feasible(set, rng));
    for (int t = 0; t < 1000; ++t) {
      const Vec c = rng.normal_vector(set.dim());
      const Vec s = set.lmo(c);
      ASSERT_TRUE(set.contains(s, 1e-12)) << set.describe();
      const double cs = c.dot(s);
      for (const auto& p : feasible) ASSERT_LE(cs, c.dot(p) + 1e-12) << set.describe();
    }
  }
}

TEST(SetProperties, ProjectionCharacterization) {
  Rng rng(12);
  for (const auto& set : sample_sets()) {
    for (int t = 0; t < 300; ++t) {
      const Vec p = 3.0 * rng.normal_vector(set.dim());
      const Vec pp = set.project(p);
      ASSERT_TRUE(set.contains(pp, 1e-12));
      const Vec q = testing::random_feasible(set, rng);
      ASSERT_LE((p - pp).dot(q - pp), 1e-10) << set.describe();
    }
  }
}

TEST(SetProperties, Nonexpansive) {
  Rng rng(13);
  for (const auto& set : sample_sets()) {
    for (int t = 0; t < 500; ++t) {
      const Vec p = 3.0 * rng.normal_vector(set.dim());
      const Vec q = 3.0 * rng.normal_vector(set.dim());
      ASSERT_LE((set.project(p) - set.project(q)).norm(), (p - q).norm() + 1e-12);
    }
  }
}

TEST(SetProperties, ProjectionIsBitwiseIdempotent) {
  Rng rng(14);
  for (const auto& set : sample_sets()) {
    for (int t = 0; t < 500; ++t) {
      const Vec once = set.project(3.0 * rng.normal_vector(set.dim()));
      const Vec twice = set.project(once);
      ASSERT_TRUE((once.array() == twice.array()).all()) << set.describe();
    }
  }
}

TEST(SetProperties, SimplexProjectionMatchesSupportEnumeration) {
  Rng rng(15);
  for (Index n = 1; n <= 6; ++n) {
    const auto set = SetSpec::simplex(n);
    for (int t = 0; t < 200; ++t) {
      const Vec p = 2.0 * rng.normal_vector(n);
      expect_vec_eq(set.project(p), reference::simplex_projection_by_supports(p), 1e-12);
    }
  }
}

TEST(SetProperties, LmoMatchesVertexEnumeration) {
  Rng rng(16);
  for (Index n = 1; n <= 8; ++n) {
    for (const auto& set : {SetSpec::l1_ball(n, 1.5), SetSpec::simplex(n), SetSpec::box(n, -1.0, 2.0)}) {
      for (int t = 0; t < 50; ++t) {
        const Vec c = rng.normal_vector(n);
        const Vec a = set.lmo(c);
        const Vec b = reference::lmo_by_enumeration(set, c);
        ASSERT_TRUE((a.array() == b.array()).all()) << set.describe();
      }
    }
  }
}

TEST(SetProperties, ProductIsConcatenationOfFactors) {
  Rng rng(17);
  const auto a = SetSpec::l1_ball(3, 1.0);
  const auto b = SetSpec::box(2, 0.0, 1.0);
  const auto c = SetSpec::simplex(3);
  const auto prod = SetSpec::product({a, b, c});
  for (int t = 0; t < 200; ++t) {
    const Vec p = 2.0 * rng.normal_vector(8);
    Vec expect_p(8), expect_l(8);
    expect_p << a.project(p.segment(0, 3)), b.project(p.segment(3, 2)), c.project(p.segment(5, 3));
    expect_l << a.lmo(p.segment(0, 3)), b.lmo(p.segment(3, 2)), c.lmo(p.segment(5, 3));
    ASSERT_TRUE((prod.project(p).array() == expect_p.array()).all());
    ASSERT_TRUE((prod.lmo(p).array() == expect_l.array()).all());
  }
}

TEST(SetProperties, LmoResultsAreExtremePoints) {
  Rng rng(18);
  for (const auto& set : {SetSpec::l1_ball(4, 2.0), SetSpec::simplex(4), SetSpec::box(4, -1.0, 1.0)}) {
    const auto verts = reference::vertices(set);
    for (int t = 0; t < 100; ++t) {
      const Vec s = set.lmo(rng.normal_vector(4));
      const bool is_vertex =
          std::any_of(verts.begin(), verts.end(), [&](const Vec& q) { return (q.array() == s.array()).all(); });
      ASSERT_TRUE(is_vertex) << set.describe();
    }
  }
}

}  // namespace
}  // namespace spb
