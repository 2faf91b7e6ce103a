#include "gmbayes/prox.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "gmbayes/linalg.hpp"

namespace gmbayes {

double soft_threshold(double v, double t) {
  if (v > t) return v - t;
  if (v < -t) return v + t;
  return 0.0;
}

Eigen::VectorXd soft_threshold(const Eigen::VectorXd& v, double t) {
  return v.unaryExpr([t](double x) { return soft_threshold(x, t); });
}

SparsitySet SparsitySet::top_s(int s) {
  if (s < 0) throw std::invalid_argument("SparsitySet: s must be nonnegative");
  SparsitySet set;
  set.kind = Kind::top_s;
  set.s = s;
  return set;
}

SparsitySet SparsitySet::top_s_with_passthrough(int s, std::vector<int> passthrough) {
  SparsitySet set = top_s(s);
  set.passthrough = std::move(passthrough);
  return set;
}

SparsitySet SparsitySet::subspace_union_frames(std::vector<Eigen::MatrixXd> frames) {
  if (frames.empty()) throw std::invalid_argument("SparsitySet: empty frame list");
  SparsitySet set;
  set.kind = Kind::subspace_union;
  set.frames = std::move(frames);
  return set;
}

SparsitySet SparsitySet::subspace_union_indices(std::vector<std::vector<int>> sets) {
  if (sets.empty()) throw std::invalid_argument("SparsitySet: empty index set list");
  SparsitySet set;
  set.kind = Kind::subspace_union;
  set.index_sets = std::move(sets);
  return set;
}

namespace {

Eigen::VectorXd project_top_s(const Eigen::VectorXd& beta, const SparsitySet& set) {
  const int n = static_cast<int>(beta.size());
  std::vector<char> keep(n, 0);
  for (int idx : set.passthrough) {
    if (idx < 0 || idx >= n) throw std::invalid_argument("project_sparse: passthrough index out of range");
    keep[idx] = 1;
  }
  std::vector<int> order;
  order.reserve(n);
  for (int j = 0; j < n; ++j)
    if (!keep[j]) order.push_back(j);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    const double da = std::abs(beta[a]);
    const double db = std::abs(beta[b]);
    if (da != db) return da > db;
    return a < b;
  });
  const int take = std::min<int>(set.s, static_cast<int>(order.size()));
  for (int j = 0; j < take; ++j) keep[order[j]] = 1;
  Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
  for (int j = 0; j < n; ++j)
    if (keep[j]) out[j] = beta[j];
  return out;
}

Eigen::VectorXd project_union(const Eigen::VectorXd& beta, const SparsitySet& set) {
  // Best subspace maximizes the norm of the projection (equivalently
  // minimizes the residual); strict comparison keeps the lowest index on ties.
  if (!set.frames.empty()) {
    int best = 0;
    double best_score = -1.0;
    for (size_t i = 0; i < set.frames.size(); ++i) {
      if (set.frames[i].rows() != beta.size()) throw std::invalid_argument("project_sparse: frame dimension mismatch");
      const double score = (set.frames[i].transpose() * beta).squaredNorm();
      if (score > best_score) {
        best_score = score;
        best = static_cast<int>(i);
      }
    }
    return set.frames[best] * (set.frames[best].transpose() * beta);
  }
  int best = 0;
  double best_score = -1.0;
  for (size_t i = 0; i < set.index_sets.size(); ++i) {
    double score = 0.0;
    for (int idx : set.index_sets[i]) {
      if (idx < 0 || idx >= beta.size()) throw std::invalid_argument("project_sparse: index out of range");
      score += beta[idx] * beta[idx];
    }
    if (score > best_score) {
      best_score = score;
      best = static_cast<int>(i);
    }
  }
  Eigen::VectorXd out = Eigen::VectorXd::Zero(beta.size());
  for (int idx : set.index_sets[best]) out[idx] = beta[idx];
  return out;
}

}  // namespace

Eigen::VectorXd project_sparse(const Eigen::VectorXd& beta, const SparsitySet& set) {
  if (set.kind == SparsitySet::Kind::top_s) return project_top_s(beta, set);
  if (set.frames.empty() == set.index_sets.empty())
    throw std::invalid_argument("project_sparse: subspace union needs exactly one of frames/index_sets");
  return project_union(beta, set);
}

WeightedL2Prox::WeightedL2Prox(const Eigen::MatrixXd& K) {
  if (K.rows() != K.cols()) throw std::invalid_argument("WeightedL2Prox: K must be square");
  const double scale = K.cwiseAbs().maxCoeff();
  if ((K - K.transpose()).cwiseAbs().maxCoeff() > 1e-10 * std::max(scale, 1.0))
    throw std::invalid_argument("WeightedL2Prox: K must be symmetric");
  const SymmetricEig eig = symmetric_eig(K);
  if (eig.eigenvalues.size() > 0 && eig.eigenvalues.minCoeff() < -1e-10 * std::max(scale, 1.0))
    throw std::invalid_argument("WeightedL2Prox: K must be positive semidefinite");
  vectors_ = eig.eigenvectors;
  values_ = eig.eigenvalues.cwiseMax(0.0);
}

Eigen::VectorXd WeightedL2Prox::apply(const Eigen::VectorXd& beta, double tau) const {
  if (beta.size() != vectors_.rows()) throw std::invalid_argument("WeightedL2Prox: dimension mismatch");
  if (tau < 0.0) throw std::invalid_argument("WeightedL2Prox: tau must be nonnegative");
  if (tau == 0.0) return beta;

  const Eigen::VectorXd b = vectors_.transpose() * beta;
  const double lmax = values_.size() > 0 ? values_.maxCoeff() : 0.0;
  const double rank_tol = 1e-12 * std::max(lmax, 1e-300);

  // Branch 1: if the minimum-norm solution of (K K^T) u = K beta has norm
  // <= tau, the prox removes the range component of beta entirely.
  double min_norm_sq = 0.0;
  for (int k = 0; k < b.size(); ++k)
    if (values_[k] > rank_tol) min_norm_sq += (b[k] / values_[k]) * (b[k] / values_[k]);
  if (min_norm_sq <= tau * tau) {
    Eigen::VectorXd kern = b;
    for (int k = 0; k < b.size(); ++k)
      if (values_[k] > rank_tol) kern[k] = 0.0;
    return vectors_ * kern;
  }

  // Branch 2: solve g(alpha) = ||(K K^T + alpha I)^{-1} K beta||^2 = tau^2;
  // the prox is then x = alpha (K K^T + alpha I)^{-1} beta.
  auto g = [&](double alpha) {
    double acc = 0.0;
    for (int k = 0; k < b.size(); ++k) {
      const double lam2 = values_[k] * values_[k];
      const double term = values_[k] * b[k] / (lam2 + alpha);
      acc += term * term;
    }
    return acc;
  };
  double lo = 0.0;
  double hi = 1.0;
  while (g(hi) > tau * tau) {
    hi *= 2.0;
    if (!std::isfinite(hi)) throw std::runtime_error("prox_weighted_l2: bisection bracket overflow");
  }
  while (hi - lo > 1e-12 * hi) {
    const double mid = 0.5 * (lo + hi);
    if (g(mid) > tau * tau)
      lo = mid;
    else
      hi = mid;
  }
  const double alpha = 0.5 * (lo + hi);

  Eigen::VectorXd out(b.size());
  for (int k = 0; k < b.size(); ++k) {
    const double lam2 = values_[k] * values_[k];
    out[k] = alpha / (lam2 + alpha) * b[k];
  }
  return vectors_ * out;
}

double WeightedL2Prox::penalty(const Eigen::VectorXd& beta) const {
  return (values_.asDiagonal() * (vectors_.transpose() * beta)).norm();
}

Eigen::VectorXd prox_weighted_l2(const Eigen::VectorXd& beta, const Eigen::MatrixXd& K, double tau) {
  return WeightedL2Prox(K).apply(beta, tau);
}

}  // namespace gmbayes
