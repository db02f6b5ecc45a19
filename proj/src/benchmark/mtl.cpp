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

#include "spbilevel/benchmark/mtl.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "spbilevel/rng.hpp"

namespace spb::bench {

namespace {

constexpr std::uint64_t kShuffleStream = 0x5851f42d4c957f2dULL;

struct TaskRows {
  std::vector<Index> train;
  std::vector<Index> val;
};

std::vector<TaskRows> partition_plan(Index n, const MtlConfig& cfg) {
  const Index T = cfg.num_tasks;
  if (n < 4 * T) {
    throw ContractError("partition: need at least 4 rows per task (" + std::to_string(n) + " rows, " +
                        std::to_string(T) + " tasks)");
  }
  std::vector<Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Index{0});
  Rng rng(cfg.seed ^ kShuffleStream);
  for (std::size_t i = perm.size() - 1; i > 0; --i) {
    const auto j = static_cast<std::size_t>(rng.below(i + 1));
    std::swap(perm[i], perm[j]);
  }

  std::vector<TaskRows> plan(static_cast<std::size_t>(T));
  const Index base = n / T;
  Index offset = 0;
  for (Index t = 0; t < T; ++t) {
    const Index rows = (t == T - 1) ? n - offset : base;
    // ceil with a guard against products like 0.7 * 10 = 7.000000000000001
    Index n_train = static_cast<Index>(std::ceil(cfg.split_frac * static_cast<double>(rows) - 1e-9));
    n_train = std::clamp<Index>(n_train, 1, rows - 1);
    auto& task = plan[static_cast<std::size_t>(t)];
    for (Index r = 0; r < rows; ++r) {
      const Index src = perm[static_cast<std::size_t>(offset + r)];
      (r < n_train ? task.train : task.val).push_back(src);
    }
    offset += rows;
  }
  return plan;
}

Mat gather_rows(const Mat& m, const std::vector<Index>& rows) {
  Mat out(static_cast<Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Index>(i)) = m.row(rows[i]);
  return out;
}

Vec gather(const Vec& v, const std::vector<Index>& rows) {
  Vec out(static_cast<Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) out[static_cast<Index>(i)] = v[rows[i]];
  return out;
}

MtlDataset build_dataset(const Mat& features, const Vec& labels, const std::vector<TaskRows>& plan) {
  MtlDataset ds;
  ds.d = features.cols();
  for (const auto& rows : plan) {
    ds.tasks.push_back(TaskData{gather_rows(features, rows.train), gather(labels, rows.train),
                                gather_rows(features, rows.val), gather(labels, rows.val)});
  }
  return ds;
}

double half_mse(const Mat& a, const Vec& b, const Vec& u) {
  return (a * u - b).squaredNorm() / (2.0 * static_cast<double>(a.rows()));
}

// Precomputed per-task moments. Gradients use the Gram form; values use the
// residual form to avoid cancellation.
struct TaskModel {
  Mat a_train, a_val;
  Vec b_train, b_val;
  Mat gram_train;  // A'A / n
  Vec corr_train;  // A'b / n
  Mat gram_val;
  Vec corr_val;
};

struct MtlModel {
  Index d = 0;
  Index T = 0;
  double reg_rho = 0.0;
  std::vector<TaskModel> tasks;

  double lambda(const Vec& xf, Index i) const { return xf[d + i]; }
  auto shared(const Vec& xf) const { return xf.head(d); }
  auto block(const Vec& theta, Index i) const { return theta.segment(i * d, d); }
};

}  // namespace

void MtlConfig::validate() const {
  if (num_tasks < 1) throw ContractError("MtlConfig: num_tasks must be >= 1");
  if (!(reg_rho > 0.0)) throw ContractError("MtlConfig: reg_rho must be positive");
  if (!(l1_radius > 0.0)) throw ContractError("MtlConfig: l1_radius must be positive");
  if (!(split_frac > 0.0 && split_frac < 1.0)) throw ContractError("MtlConfig: split_frac must lie in (0, 1)");
  if (!(noise_std >= 0.0)) throw ContractError("MtlConfig: noise_std must be nonnegative");
}

void MtlDataset::validate() const {
  if (tasks.empty()) throw ContractError("MtlDataset: no tasks");
  if (d <= 0) throw ContractError("MtlDataset: feature dimension must be positive");
  for (const auto& t : tasks) {
    if (t.a_train.rows() < 1 || t.a_val.rows() < 1)
      throw ContractError("MtlDataset: every task needs training and validation rows");
    if (t.a_train.cols() != d || t.a_val.cols() != d)
      throw ContractError("MtlDataset: inconsistent feature dimension across tasks");
    if (t.b_train.size() != t.a_train.rows() || t.b_val.size() != t.a_val.rows())
      throw ContractError("MtlDataset: label length does not match row count");
  }
}

MtlDataset partition_tasks(const Mat& features, const Vec& labels, const MtlConfig& cfg) {
  cfg.validate();
  if (features.rows() != labels.size()) throw ContractError("partition_tasks: features/labels row mismatch");
  return build_dataset(features, labels, partition_plan(features.rows(), cfg));
}

SyntheticData gen_synthetic(Index n, Index d, const MtlConfig& cfg, const std::optional<Vec>& lambda_override) {
  cfg.validate();
  if (d < 1) throw ContractError("gen_synthetic: d must be >= 1");
  const Index T = cfg.num_tasks;
  const auto plan = partition_plan(n, cfg);

  Rng rng(cfg.seed);
  SyntheticData out;
  out.features = rng.normal_matrix(n, d);
  out.truth.x = rng.normal_vector(d);
  out.truth.y.resize(d, T);
  for (Index t = 0; t < T; ++t) out.truth.y.col(t) = rng.normal_vector(d);
  out.truth.lambda.resize(T);
  for (Index t = 0; t < T; ++t) out.truth.lambda[t] = rng.uniform();
  if (lambda_override) {
    require_dim(*lambda_override, T, "lambda_override");
    out.truth.lambda = *lambda_override;
  }
  const Vec noise = rng.normal_vector(n);

  out.labels.resize(n);
  for (Index t = 0; t < T; ++t) {
    const double lam = out.truth.lambda[t];
    const Vec coef = lam * out.truth.y.col(t) + (1.0 - lam) * out.truth.x;
    const auto& rows = plan[static_cast<std::size_t>(t)];
    for (const auto* part : {&rows.train, &rows.val}) {
      for (Index r : *part) out.labels[r] = out.features.row(r).dot(coef) + cfg.noise_std * noise[r];
    }
  }
  out.dataset = build_dataset(out.features, out.labels, plan);
  return out;
}

MtlProblem build_mtl_problem(const MtlDataset& ds, const MtlConfig& cfg) {
  cfg.validate();
  ds.validate();
  if (static_cast<Index>(ds.tasks.size()) != cfg.num_tasks) {
    throw ContractError("build_mtl_problem: dataset has " + std::to_string(ds.tasks.size()) +
                        " tasks, config says " + std::to_string(cfg.num_tasks));
  }
  auto model = std::make_shared<MtlModel>();
  model->d = ds.d;
  model->T = cfg.num_tasks;
  model->reg_rho = cfg.reg_rho;
  double max_curv = 0.0;
  for (const auto& t : ds.tasks) {
    TaskModel tm;
    tm.a_train = t.a_train;
    tm.b_train = t.b_train;
    tm.a_val = t.a_val;
    tm.b_val = t.b_val;
    const double ntr = static_cast<double>(t.a_train.rows());
    const double nval = static_cast<double>(t.a_val.rows());
    tm.gram_train = t.a_train.transpose() * t.a_train / ntr;
    tm.corr_train = t.a_train.transpose() * t.b_train / ntr;
    tm.gram_val = t.a_val.transpose() * t.a_val / nval;
    tm.corr_val = t.a_val.transpose() * t.b_val / nval;
    if (cfg.lipschitz == LipschitzBound::kFrobenius) {
      max_curv = std::max(max_curv, tm.gram_train.trace());
    } else {
      Eigen::SelfAdjointEigenSolver<Mat> eig(tm.gram_train, Eigen::EigenvaluesOnly);
      max_curv = std::max(max_curv, eig.eigenvalues().maxCoeff());
    }
    model->tasks.push_back(std::move(tm));
  }

  const Index d = ds.d;
  const Index T = model->T;
  MtlProblem out{SpBilevelProblem{},
                 SetSpec::product({SetSpec::l1_ball(d, cfg.l1_radius), SetSpec::box(T, 0.0, 1.0)}),
                 SetSpec::simplex(T)};
  auto& p = out.problem;
  p.dims = Dims{d + T, T, d * T};
  p.constants = SmoothnessConstants{cfg.reg_rho, cfg.reg_rho + max_curv, true, 0.0};

  p.phi = [model](const Vec&, const Vec& theta, const Vec& eta) {
    double value = 0.0;
    for (Index i = 0; i < model->T; ++i) {
      const auto& tm = model->tasks[static_cast<std::size_t>(i)];
      value += eta[i] * half_mse(tm.a_val, tm.b_val, model->block(theta, i));
    }
    return value;
  };
  p.grad_phi_x = [model](const Vec& xf, const Vec&, const Vec&) -> Vec { return Vec::Zero(xf.size()); };
  p.grad_phi_theta = [model](const Vec&, const Vec& theta, const Vec& eta) {
    Vec out(theta.size());
    for (Index i = 0; i < model->T; ++i) {
      const auto& tm = model->tasks[static_cast<std::size_t>(i)];
      out.segment(i * model->d, model->d) = eta[i] * (tm.gram_val * model->block(theta, i) - tm.corr_val);
    }
    return out;
  };
  p.grad_phi_y = [model](const Vec&, const Vec& theta, const Vec&) {
    Vec out(model->T);
    for (Index i = 0; i < model->T; ++i) {
      const auto& tm = model->tasks[static_cast<std::size_t>(i)];
      out[i] = half_mse(tm.a_val, tm.b_val, model->block(theta, i));
    }
    return out;
  };
  p.g_val = [model](const Vec& xf, const Vec& theta) {
    double value = 0.5 * model->reg_rho * theta.squaredNorm();
    for (Index i = 0; i < model->T; ++i) {
      const auto& tm = model->tasks[static_cast<std::size_t>(i)];
      const double lam = model->lambda(xf, i);
      const Vec u = lam * model->block(theta, i) + (1.0 - lam) * model->shared(xf);
      value += half_mse(tm.a_train, tm.b_train, u);
    }
    return value;
  };
  p.grad_g_theta = [model](const Vec& xf, const Vec& theta) {
    Vec out = model->reg_rho * theta;
    for (Index i = 0; i < model->T; ++i) {
      const auto& tm = model->tasks[static_cast<std::size_t>(i)];
      const double lam = model->lambda(xf, i);
      const Vec u = lam * model->block(theta, i) + (1.0 - lam) * model->shared(xf);
      out.segment(i * model->d, model->d) += lam * (tm.gram_train * u - tm.corr_train);
    }
    return out;
  };
  p.hvp_g_thetatheta = [model](const Vec& xf, const Vec&, const Vec& v) {
    Vec out = model->reg_rho * v;
    for (Index i = 0; i < model->T; ++i) {
      const auto& tm = model->tasks[static_cast<std::size_t>(i)];
      const double lam = model->lambda(xf, i);
      out.segment(i * model->d, model->d) += (lam * lam) * (tm.gram_train * model->block(v, i));
    }
    return out;
  };
  p.jvp_g_thetax = [model](const Vec& xf, const Vec& theta, const Vec& v) {
    const Index d = model->d;
    Vec out = Vec::Zero(d + model->T);
    for (Index i = 0; i < model->T; ++i) {
      const auto& tm = model->tasks[static_cast<std::size_t>(i)];
      const double lam = model->lambda(xf, i);
      const auto x = model->shared(xf);
      const auto yi = model->block(theta, i);
      const Vec gv = tm.gram_train * model->block(v, i);
      const Vec q = tm.gram_train * (lam * yi + (1.0 - lam) * x) - tm.corr_train;
      out.head(d) += (lam * (1.0 - lam)) * gv;
      out[d + i] = q.dot(model->block(v, i)) + lam * gv.dot(yi - x);
    }
    return out;
  };
  return out;
}

Vec exact_lower_solution(const MtlDataset& ds, const Vec& x, const Vec& lambda, double reg_rho) {
  ds.validate();
  const Index d = ds.d;
  const auto T = static_cast<Index>(ds.tasks.size());
  require_dim(x, d, "x");
  require_dim(lambda, T, "lambda");
  if (!(reg_rho > 0.0)) throw ContractError("exact_lower_solution: reg_rho must be positive");
  if ((lambda.array() < 0.0).any() || (lambda.array() > 1.0).any())
    throw ContractError("exact_lower_solution: lambda must lie in [0, 1]");

  Vec theta(d * T);
  for (Index i = 0; i < T; ++i) {
    const auto& t = ds.tasks[static_cast<std::size_t>(i)];
    const double n = static_cast<double>(t.a_train.rows());
    const double lam = lambda[i];
    const Mat gram = t.a_train.transpose() * t.a_train / n;
    const Vec corr = t.a_train.transpose() * t.b_train / n;
    const Mat lhs = (lam * lam) * gram + reg_rho * Mat::Identity(d, d);
    const Vec rhs = lam * (corr - (1.0 - lam) * (gram * x));
    theta.segment(i * d, d) = lhs.llt().solve(rhs);
  }
  return theta;
}

Vec validation_losses(const MtlDataset& ds, const Mat& y) {
  const auto T = static_cast<Index>(ds.tasks.size());
  if (y.rows() != ds.d || y.cols() != T) throw ContractError("validation_losses: y must be d x T");
  Vec out(T);
  for (Index i = 0; i < T; ++i) {
    const auto& t = ds.tasks[static_cast<std::size_t>(i)];
    out[i] = half_mse(t.a_val, t.b_val, y.col(i));
  }
  return out;
}

}  // namespace spb::bench
