#pragma once

#include <Eigen/Dense>

#include "gmbayes/lasso.hpp"
#include "gmbayes/prox.hpp"

namespace gmbayes {

struct IhtOptions {
  double step = 0.0;  // <= 0 selects 0.99 / ||A M||^2
  int max_iters = 500;
  double tol = 1e-8;
};

struct IhtResult {
  Eigen::VectorXd beta;
  Eigen::VectorXd x;  // M beta
  SolveStats stats;
};

/// Iterative hard thresholding: beta <- P_S(beta - t M^T A^T (A M beta - y)),
/// starting from zero.  P_S is project_sparse for the given set.
IhtResult iht(const Eigen::VectorXd& y, const Eigen::MatrixXd& A, const Eigen::MatrixXd& M, const SparsitySet& set,
              const IhtOptions& opts);

Eigen::MatrixXd iht_batch(const Eigen::MatrixXd& Y, const Eigen::MatrixXd& A, const Eigen::MatrixXd& M,
                          const SparsitySet& set, const IhtOptions& opts, SolveStats* stats = nullptr);

}  // namespace gmbayes
