#include "gmbayes/iht.hpp"

#include <stdexcept>

#include "gmbayes/linalg.hpp"

namespace gmbayes {

Eigen::MatrixXd iht_batch(const Eigen::MatrixXd& Y, const Eigen::MatrixXd& A, const Eigen::MatrixXd& M,
                          const SparsitySet& set, const IhtOptions& opts, SolveStats* stats) {
  if (A.cols() != M.rows()) throw std::invalid_argument("iht: A and M dimensions disagree");
  if (Y.rows() != A.rows()) throw std::invalid_argument("iht: observation dimension mismatch");

  const Eigen::MatrixXd AM = A * M;
  const double norm = spectral_norm_estimate(AM);
  double t = opts.step;
  if (t <= 0.0) {
    t = norm > 0.0 ? 0.99 / (norm * norm) : 1.0;
  } else if (norm > 0.0 && t > (1.0 + 1e-9) / (norm * norm)) {
    throw std::invalid_argument("iht: step exceeds stability bound");
  }

  Eigen::MatrixXd beta = Eigen::MatrixXd::Zero(AM.cols(), Y.cols());
  SolveStats local;
  for (int iter = 0; iter < opts.max_iters; ++iter) {
    const Eigen::MatrixXd stepped = beta - t * (AM.transpose() * (AM * beta - Y));
    Eigen::MatrixXd next(beta.rows(), beta.cols());
    for (int c = 0; c < stepped.cols(); ++c) next.col(c) = project_sparse(stepped.col(c), set);
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
  if (stats) {
    *stats = local;
    if (Y.cols() == 1) stats->objective = 0.5 * (AM * beta - Y).squaredNorm();
  }
  return beta;
}

IhtResult iht(const Eigen::VectorXd& y, const Eigen::MatrixXd& A, const Eigen::MatrixXd& M, const SparsitySet& set,
              const IhtOptions& opts) {
  IhtResult res;
  res.beta = iht_batch(y, A, M, set, opts, &res.stats);
  res.x = M * res.beta;
  return res;
}

}  // namespace gmbayes
