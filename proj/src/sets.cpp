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

#include "spbilevel/sets.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <sstream>

namespace spb {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require_positive_dim(Index dim, const char* what) {
  if (dim <= 0) throw ContractError(std::string(what) + ": dimension must be positive");
}

void require_positive_radius(double r, const char* what) {
  if (!(r > 0.0) || !std::isfinite(r)) throw ContractError(std::string(what) + ": radius must be positive");
}

// Roundoff slack for feasibility short-circuits.
double slack(Index n, double scale) { return 4.0 * static_cast<double>(n) * kEps * std::max(1.0, scale); }

}  // namespace

Vec project_scaled_simplex(const Vec& v, double z) {
  const Index n = v.size();
  Vec u = v;
  std::sort(u.data(), u.data() + n, std::greater<>());
  double cumsum = 0.0;
  double threshold = 0.0;
  for (Index j = 0; j < n; ++j) {
    cumsum += u[j];
    const double t = (cumsum - z) / static_cast<double>(j + 1);
    if (u[j] - t > 0.0) threshold = t;
  }
  return (v.array() - threshold).cwiseMax(0.0).matrix();
}

SetSpec SetSpec::l1_ball(Index dim, double radius) {
  require_positive_dim(dim, "L1Ball");
  require_positive_radius(radius, "L1Ball");
  return SetSpec(L1Ball{dim, radius}, dim, 2.0 * radius);
}

SetSpec SetSpec::simplex(Index dim) {
  require_positive_dim(dim, "Simplex");
  return SetSpec(Simplex{dim}, dim, dim == 1 ? 0.0 : std::sqrt(2.0));
}

SetSpec SetSpec::box(Vec lo, Vec hi) {
  if (lo.size() != hi.size()) throw ContractError("Box: lo and hi differ in dimension");
  require_positive_dim(lo.size(), "Box");
  if (!lo.allFinite() || !hi.allFinite()) throw ContractError("Box: bounds must be finite");
  if ((lo.array() > hi.array()).any()) throw ContractError("Box: lo <= hi must hold componentwise");
  const Index dim = lo.size();
  const double diam = (hi - lo).norm();
  return SetSpec(Box{std::move(lo), std::move(hi)}, dim, diam);
}

SetSpec SetSpec::box(Index dim, double lo, double hi) {
  require_positive_dim(dim, "Box");
  return box(Vec::Constant(dim, lo), Vec::Constant(dim, hi));
}

SetSpec SetSpec::ball2(Vec center, double radius) {
  require_positive_dim(center.size(), "Ball2");
  require_positive_radius(radius, "Ball2");
  const Index dim = center.size();
  return SetSpec(Ball2{std::move(center), radius}, dim, 2.0 * radius);
}

SetSpec SetSpec::product(std::vector<SetSpec> factors) {
  if (factors.empty()) throw ContractError("Product: needs at least one factor");
  Product prod;
  Index offset = 0;
  double diam2 = 0.0;
  for (auto& f : factors) {
    const Index size = f.dim();
    diam2 += f.diameter() * f.diameter();
    prod.factors.push_back(ProductFactor{std::make_shared<const SetSpec>(std::move(f)), offset, size});
    offset += size;
  }
  return SetSpec(std::move(prod), offset, std::sqrt(diam2));
}

std::string SetSpec::describe() const {
  std::ostringstream out;
  out.precision(17);
  std::visit(Overloaded{
                 [&](const L1Ball& s) { out << "L1Ball(dim=" << s.dim << ",radius=" << s.radius << ")"; },
                 [&](const Simplex& s) { out << "Simplex(dim=" << s.dim << ")"; },
                 [&](const Box& s) { out << "Box(dim=" << s.lo.size() << ")"; },
                 [&](const Ball2& s) {
                   out << "Ball2(dim=" << s.center.size() << ",radius=" << s.radius << ")";
                 },
                 [&](const Product& s) {
                   out << "Product(";
                   for (std::size_t i = 0; i < s.factors.size(); ++i) {
                     if (i) out << " x ";
                     out << s.factors[i].set->describe();
                   }
                   out << ")";
                 },
             },
             variant_);
  return out.str();
}

Vec SetSpec::lmo(const Vec& c) const {
  require_dim(c, dim_, "lmo cost");
  return std::visit(
      Overloaded{
          [&](const L1Ball& s) -> Vec {
            Index j = 0;
            double best = std::abs(c[0]);
            for (Index i = 1; i < c.size(); ++i) {
              if (std::abs(c[i]) > best) {
                best = std::abs(c[i]);
                j = i;
              }
            }
            Vec out = Vec::Zero(s.dim);
            out[j] = c[j] > 0.0 ? -s.radius : s.radius;
            return out;
          },
          [&](const Simplex& s) -> Vec {
            Index j = 0;
            for (Index i = 1; i < c.size(); ++i)
              if (c[i] < c[j]) j = i;
            return Vec::Unit(s.dim, j);
          },
          [&](const Box& s) -> Vec {
            Vec out(c.size());
            for (Index i = 0; i < c.size(); ++i) out[i] = c[i] < 0.0 ? s.hi[i] : s.lo[i];
            return out;
          },
          [&](const Ball2& s) -> Vec {
            const double norm = c.norm();
            if (norm == 0.0) return s.center;
            return s.center - (s.radius / norm) * c;
          },
          [&](const Product& s) -> Vec {
            Vec out(dim_);
            for (const auto& f : s.factors) out.segment(f.offset, f.size) = f.set->lmo(c.segment(f.offset, f.size));
            return out;
          },
      },
      variant_);
}

Vec SetSpec::project(const Vec& p) const {
  require_dim(p, dim_, "project point");
  return std::visit(
      Overloaded{
          [&](const L1Ball& s) -> Vec {
            const double l1 = p.lpNorm<1>();
            if (l1 <= s.radius * (1.0 + slack(s.dim, 1.0))) return p;
            const Vec mag = project_scaled_simplex(p.cwiseAbs(), s.radius);
            Vec out(p.size());
            for (Index i = 0; i < p.size(); ++i) out[i] = p[i] < 0.0 ? -mag[i] : mag[i];
            return out;
          },
          [&](const Simplex& s) -> Vec {
            if ((p.array() >= 0.0).all() && std::abs(p.sum() - 1.0) <= slack(s.dim, 1.0)) return p;
            return project_scaled_simplex(p, 1.0);
          },
          [&](const Box& s) -> Vec { return p.cwiseMax(s.lo).cwiseMin(s.hi); },
          [&](const Ball2& s) -> Vec {
            const Vec diff = p - s.center;
            const double norm = diff.norm();
            if (norm <= s.radius * (1.0 + slack(s.center.size(), 1.0))) return p;
            return s.center + (s.radius / norm) * diff;
          },
          [&](const Product& s) -> Vec {
            Vec out(dim_);
            for (const auto& f : s.factors)
              out.segment(f.offset, f.size) = f.set->project(p.segment(f.offset, f.size));
            return out;
          },
      },
      variant_);
}

double SetSpec::distance(const Vec& p) const { return (p - project(p)).norm(); }

bool SetSpec::contains(const Vec& p, double tol) const {
  if (!(tol >= 0.0)) throw ContractError("contains: tol must be nonnegative");
  require_dim(p, dim_, "contains point");
  if (!p.allFinite()) return false;
  const double scale = std::max(1.0, p.lpNorm<Eigen::Infinity>());
  return distance(p) <= tol + slack(dim_, scale);
}

}  // namespace spb
