#include "gmbayes/lasso.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "gmbayes/linalg.hpp"
#include "gmbayes/prox.hpp"

namespace gmbayes {

namespace {

double resolve_step(double requested, const Eigen::MatrixXd& op) {
  const double norm = spectral_norm_estimate(op);
  const double bound = norm > 0.0 ? 1.0 / (norm * norm) : std::numeric_limits<double>::infinity();
  if (requested <= 0.0) return std::isfinite(bound) ? 0.99 * bound : 1.0;
  // Power iteration underestimates, so allow a whisker above the estimate.
  if (requested > bound * (1.0 + 1e-9))
    throw std::invalid_argument("step " + std::to_string(requested) + " exceeds stability bound " +
                                std::to_string(bound));
  return requested;
}

double l1_penalized(const Eigen::VectorXd& beta, const std::vector<char>& penalized) {
  double acc = 0.0;
  for (int j = 0; j < beta.size(); ++j)
    if (penalized[j]) acc += std::abs(beta[j]);
  return acc;
}

}  // namespace

Eigen::MatrixXd ista_lasso_batch(const Eigen::MatrixXd& Y, const Eigen::MatrixXd& A, const Eigen::MatrixXd& M,
                                 const IstaOptions& opts, SolveStats* stats) {
  if (A.cols() != M.rows()) throw std::invalid_argument("ista_lasso: A and M dimensions disagree");
  if (Y.rows() != A.rows()) throw std::invalid_argument("ista_lasso: observation dimension mismatch");
  if (opts.lambda < 0.0) throw std::invalid_argument("ista_lasso: lambda must be nonnegative");

  const Eigen::MatrixXd AM = A * M;
  const double t = resolve_step(opts.step, AM);
  const double thresh = t * opts.lambda;

  std::vector<char> penalized(static_cast<size_t>(AM.cols()), 1);
  for (int idx : opts.unpenalized) {
    if (idx < 0 || idx >= AM.cols()) throw std::invalid_argument("ista_lasso: unpenalized index out of range");
    penalized[idx] = 0;
  }

  Eigen::MatrixXd beta = Eigen::MatrixXd::Zero(AM.cols(), Y.cols());
  SolveStats local;
  for (int iter = 0; iter < opts.max_iters; ++iter) {
    const Eigen::MatrixXd grad = AM.transpose() * (AM * beta - Y);
    Eigen::MatrixXd next = beta - t * grad;
    for (int j = 0; j < next.rows(); ++j) {
      if (!penalized[j]) continue;
      next.row(j) = next.row(j).unaryExpr([thresh](double v) { return soft_threshold(v, thresh); });
    }
    double delta = 0.0;
    for (int c = 0; c < next.cols(); ++c) {
      const double d = (next.col(c) - beta.col(c)).norm() / (1.0 + beta.col(c).norm());
      delta = std::max(delta, d);
    }
    beta = std::move(next);
    local.iterations = iter + 1;
    local.final_delta = delta;
    if (delta <= opts.tol) {
      local.converged = true;
      break;
    }
  }
  if (stats) {
    *stats = local;
    if (Y.cols() == 1)
      stats->objective = 0.5 * (AM * beta - Y).squaredNorm() + opts.lambda * l1_penalized(beta.col(0), penalized);
  }
  return beta;
}

IstaResult ista_lasso(const Eigen::VectorXd& y, const Eigen::MatrixXd& A, const Eigen::MatrixXd& M,
                      const IstaOptions& opts) {
  IstaResult res;
  res.beta = ista_lasso_batch(y, A, M, opts, &res.stats);
  res.x = M * res.beta;
  return res;
}

namespace {

struct GroupLayout {
  std::vector<int> offsets;
  Eigen::MatrixXd am;  // A [M_1 ... M_L]
  std::vector<WeightedL2Prox> proxes;
};

GroupLayout build_layout(const Eigen::MatrixXd& A, const GroupBases& groups, double lambda) {
  const size_t L = groups.bases.size();
  if (L == 0 || groups.penalties.size() != L) throw std::invalid_argument("group_lasso: bases/penalties mismatch");
  if (lambda < 0.0) throw std::invalid_argument("group_lasso: lambda must be nonnegative");
  GroupLayout lay;
  lay.offsets.assign(L + 1, 0);
  for (size_t i = 0; i < L; ++i) {
    if (groups.bases[i].rows() != A.cols()) throw std::invalid_argument("group_lasso: basis dimension mismatch");
    if (groups.penalties[i].rows() != groups.bases[i].cols())
      throw std::invalid_argument("group_lasso: penalty dimension mismatch");
    lay.offsets[i + 1] = lay.offsets[i] + static_cast<int>(groups.bases[i].cols());
  }
  lay.am.resize(A.rows(), lay.offsets.back());
  for (size_t i = 0; i < L; ++i) lay.am.middleCols(lay.offsets[i], groups.bases[i].cols()) = A * groups.bases[i];
  lay.proxes.reserve(L);
  for (size_t i = 0; i < L; ++i) lay.proxes.emplace_back(groups.penalties[i]);
  return lay;
}

}  // namespace

Eigen::MatrixXd group_lasso_batch(const Eigen::MatrixXd& Y, const Eigen::MatrixXd& A, const GroupBases& groups,
                                  const GroupLassoOptions& opts, SolveStats* stats) {
  if (Y.rows() != A.rows()) throw std::invalid_argument("group_lasso: observation dimension mismatch");
  const GroupLayout lay = build_layout(A, groups, opts.lambda);
  const size_t L = groups.bases.size();
  const double t = resolve_step(opts.step, lay.am);

  Eigen::MatrixXd beta = Eigen::MatrixXd::Zero(lay.offsets.back(), Y.cols());
  SolveStats local;
  for (int iter = 0; iter < opts.max_iters; ++iter) {
    const Eigen::MatrixXd stepped = beta - t * (lay.am.transpose() * (lay.am * beta - Y));
    Eigen::MatrixXd next(beta.rows(), beta.cols());
    for (size_t i = 0; i < L; ++i) {
      const int len = lay.offsets[i + 1] - lay.offsets[i];
      for (int c = 0; c < stepped.cols(); ++c)
        next.block(lay.offsets[i], c, len, 1) =
            lay.proxes[i].apply(stepped.block(lay.offsets[i], c, len, 1), t * opts.lambda);
    }
    double delta = 0.0;
    for (int c = 0; c < next.cols(); ++c)
      delta = std::max(delta, (next.col(c) - beta.col(c)).norm() / (1.0 + beta.col(c).norm()));
    beta = std::move(next);
    local.iterations = iter + 1;
    local.final_delta = delta;
    if (delta <= opts.tol) {
      local.converged = true;
      break;
    }
  }
  if (stats) *stats = local;
  return beta;
}

GroupLassoResult group_lasso(const Eigen::VectorXd& y, const Eigen::MatrixXd& A, const GroupBases& groups,
                             GroupLassoMode mode, const GroupLassoOptions& opts) {
  const GroupLayout lay = build_layout(A, groups, opts.lambda);
  const size_t L = groups.bases.size();
  const std::vector<int>& offsets = lay.offsets;
  const Eigen::MatrixXd& AM = lay.am;
  const int total = offsets.back();

  auto penalty = [&](const Eigen::VectorXd& beta) {
    double acc = 0.0;
    for (size_t i = 0; i < L; ++i) acc += lay.proxes[i].penalty(beta.segment(offsets[i], offsets[i + 1] - offsets[i]));
    return acc;
  };
  auto objective = [&](const Eigen::VectorXd& beta) {
    return 0.5 * (AM * beta - y).squaredNorm() + opts.lambda * penalty(beta);
  };

  GroupLassoResult res;
  res.beta = Eigen::VectorXd::Zero(total);

  if (mode == GroupLassoMode::proxgrad) {
    res.beta = group_lasso_batch(y, A, groups, opts, &res.stats);
  } else {
    // Adam on the smoothed objective; fixed iteration budget.
    const double eps2 = opts.smoothing_eps * opts.smoothing_eps;
    std::vector<Eigen::MatrixXd> K2(L);
    for (size_t i = 0; i < L; ++i) K2[i] = groups.penalties[i].transpose() * groups.penalties[i];
    const double initial = objective(res.beta);
    Eigen::VectorXd m1 = Eigen::VectorXd::Zero(total);
    Eigen::VectorXd m2 = Eigen::VectorXd::Zero(total);
    for (int iter = 1; iter <= opts.adam_iters; ++iter) {
      Eigen::VectorXd grad = AM.transpose() * (AM * res.beta - y);
      for (size_t i = 0; i < L; ++i) {
        const int len = offsets[i + 1] - offsets[i];
        const Eigen::VectorXd seg = res.beta.segment(offsets[i], len);
        const Eigen::VectorXd k2seg = K2[i] * seg;
        const double smooth = std::sqrt(seg.dot(k2seg) + eps2);
        grad.segment(offsets[i], len) += opts.lambda / smooth * k2seg;
      }
      m1 = 0.9 * m1 + 0.1 * grad;
      m2 = (0.999 * m2.array() + 0.001 * grad.array().square()).matrix();
      const double bc1 = 1.0 - std::pow(0.9, iter);
      const double bc2 = 1.0 - std::pow(0.999, iter);
      res.beta.array() -= opts.adam_lr * (m1.array() / bc1) / ((m2.array() / bc2).sqrt() + 1e-8);
      res.stats.iterations = iter;
      const double obj = objective(res.beta);
      if (!std::isfinite(obj) || obj > 10.0 * std::max(initial, 1e-30))
        throw std::runtime_error("group_lasso: adam diverged at iteration " + std::to_string(iter) +
                                 " (objective " + std::to_string(obj) + ", initial " + std::to_string(initial) + ")");
    }
    res.stats.converged = true;
  }

  res.stats.objective = objective(res.beta);
  res.x = Eigen::VectorXd::Zero(A.cols());
  for (size_t i = 0; i < L; ++i)
    res.x += groups.bases[i] * res.beta.segment(offsets[i], offsets[i + 1] - offsets[i]);
  return res;
}

}  // namespace gmbayes
