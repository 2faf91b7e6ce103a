#pragma once

#include <Eigen/Dense>
#include <vector>

namespace gmbayes {

struct SolveStats {
  int iterations = 0;
  double final_delta = 0.0;
  bool converged = false;
  double objective = 0.0;
};

struct IstaOptions {
  double lambda = 0.0;
  double step = 0.0;  // <= 0 selects 0.99 / ||A M||^2 (power iteration estimate)
  int max_iters = 1000;
  double tol = 1e-8;
  std::vector<int> unpenalized;  // coefficient indices exempt from thresholding
};

struct IstaResult {
  Eigen::VectorXd beta;
  Eigen::VectorXd x;  // M beta
  SolveStats stats;
};

/// ISTA for min_beta 1/2 ||A M beta - y||^2 + lambda ||beta||_1 (the l1 norm
/// taken over penalized coordinates).  Throws std::invalid_argument when an
/// explicit step exceeds the measured stability bound 1 / ||A M||^2.
IstaResult ista_lasso(const Eigen::VectorXd& y, const Eigen::MatrixXd& A, const Eigen::MatrixXd& M,
                      const IstaOptions& opts);

/// Column-wise batch variant: column j of Y is an observation, column j of
/// the result is the corresponding beta.  Runs until every column meets the
/// tolerance or max_iters.
Eigen::MatrixXd ista_lasso_batch(const Eigen::MatrixXd& Y, const Eigen::MatrixXd& A, const Eigen::MatrixXd& M,
                                 const IstaOptions& opts, SolveStats* stats = nullptr);

struct GroupBases {
  std::vector<Eigen::MatrixXd> bases;      // M_i, n x d_i
  std::vector<Eigen::MatrixXd> penalties;  // K_i, d_i x d_i symmetric PSD
};

enum class GroupLassoMode { proxgrad, adam };

struct GroupLassoOptions {
  double lambda = 0.0;
  double step = 0.0;  // proxgrad; <= 0 selects 0.99 / ||A [M_1 ... M_L]||^2
  int max_iters = 500;
  double tol = 1e-8;
  // adam mode (smoothed penalty sqrt(||K beta||^2 + eps^2))
  double adam_lr = 1e-2;
  int adam_iters = 2000;
  double smoothing_eps = 1e-8;
};

struct GroupLassoResult {
  Eigen::VectorXd beta;  // stacked blocks
  Eigen::VectorXd x;     // sum_i M_i beta_i
  SolveStats stats;
};

/// min 1/2 ||y - A sum_i M_i beta_i||^2 + lambda sum_i ||K_i beta_i||_2.
/// proxgrad applies the exact block prox; adam runs fixed-step Adam on the
/// smoothed objective and aborts (std::runtime_error) when the objective
/// exceeds ten times its initial value.
GroupLassoResult group_lasso(const Eigen::VectorXd& y, const Eigen::MatrixXd& A, const GroupBases& groups,
                             GroupLassoMode mode, const GroupLassoOptions& opts);

/// Batched proxgrad variant: columns of Y are observations, columns of the
/// result are the stacked coefficient vectors.
Eigen::MatrixXd group_lasso_batch(const Eigen::MatrixXd& Y, const Eigen::MatrixXd& A, const GroupBases& groups,
                                  const GroupLassoOptions& opts, SolveStats* stats = nullptr);

}  // namespace gmbayes
