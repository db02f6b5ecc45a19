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

#include "spbilevel/reference.hpp"

#include <limits>

namespace spb::reference {

std::vector<Vec> vertices(const SetSpec& set) {
  std::vector<Vec> out;
  const Index n = set.dim();
  if (const auto* s = std::get_if<L1Ball>(&set.variant())) {
    for (Index j = 0; j < n; ++j) {
      out.push_back(s->radius * Vec::Unit(n, j));
      out.push_back(-s->radius * Vec::Unit(n, j));
    }
  } else if (std::holds_alternative<Simplex>(set.variant())) {
    for (Index j = 0; j < n; ++j) out.push_back(Vec::Unit(n, j));
  } else if (const auto* b = std::get_if<Box>(&set.variant())) {
    if (n > 20) throw ContractError("vertices: box dimension too large to enumerate");
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
      Vec v(n);
      for (Index j = 0; j < n; ++j) v[j] = (mask >> j) & 1U ? b->hi[j] : b->lo[j];
      out.push_back(std::move(v));
    }
  } else if (const auto* prod = std::get_if<Product>(&set.variant())) {
    out.push_back(Vec::Zero(n));
    for (const auto& f : prod->factors) {
      std::vector<Vec> next;
      for (const Vec& head : out) {
        for (const Vec& part : vertices(*f.set)) {
          Vec v = head;
          v.segment(f.offset, f.size) = part;
          next.push_back(std::move(v));
        }
      }
      out = std::move(next);
    }
  } else {
    throw ContractError("vertices: set is not a polytope");
  }
  return out;
}

Vec lmo_by_enumeration(const SetSpec& set, const Vec& c) {
  require_dim(c, set.dim(), "cost");
  double best = std::numeric_limits<double>::infinity();
  Vec arg;
  for (const Vec& v : vertices(set)) {
    const double value = c.dot(v);
    if (value < best) {
      best = value;
      arg = v;
    }
  }
  return arg;
}

Vec simplex_projection_by_supports(const Vec& p) {
  const Index n = p.size();
  if (n < 1 || n > 20) throw ContractError("simplex_projection_by_supports: dimension must be in [1, 20]");
  double best = std::numeric_limits<double>::infinity();
  Vec arg;
  for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << n); ++mask) {
    // minimize ||s - p|| subject to sum(s) = 1, s_i = 0 off the support
    double sum = 0.0;
    double count = 0.0;
    for (Index j = 0; j < n; ++j) {
      if ((mask >> j) & 1U) {
        sum += p[j];
        count += 1.0;
      }
    }
    const double shift = (sum - 1.0) / count;
    Vec s = Vec::Zero(n);
    bool feasible = true;
    for (Index j = 0; j < n; ++j) {
      if ((mask >> j) & 1U) {
        s[j] = p[j] - shift;
        if (s[j] < 0.0) feasible = false;
      }
    }
    if (!feasible) continue;
    const double dist = (s - p).squaredNorm();
    if (dist < best) {
      best = dist;
      arg = std::move(s);
    }
  }
  return arg;
}

}  // namespace spb::reference
