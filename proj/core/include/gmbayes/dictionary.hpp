#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "gmbayes/lasso.hpp"

namespace gmbayes {

struct Dictionary {
  Eigen::MatrixXd atoms;  // n x d, unit-norm columns

  int dim() const { return static_cast<int>(atoms.rows()); }
  int size() const { return static_cast<int>(atoms.cols()); }
  /// Throws when atoms are not unit norm (1e-8) or not full column rank.
  void validate() const;
};

struct SparseCodeOptions {
  int max_passes = 5000;
  double kkt_tol = 1e-8;  // relative to max(1, ||D^T z||_inf)
};

/// Coordinate descent for min_beta 1/2 ||z - D beta||^2 + lambda ||beta||_1.
/// Runs until the KKT subgradient residual meets kkt_tol; lambda = 0 falls
/// back to the least-squares solution.  Throws std::runtime_error when the
/// pass budget is exhausted before the residual converges.
Eigen::VectorXd sparse_code(const Dictionary& dict, const Eigen::VectorXd& z, double lambda,
                            const SparseCodeOptions& opts = {});

struct DictLearnOptions {
  int epochs = 15;
  std::uint64_t seed = 0;
  SparseCodeOptions code;
};

struct DictLearnResult {
  Dictionary dict;
  std::vector<double> objective;  // mean coding objective after each epoch
  int replaced_atoms = 0;
};

/// Alternating sparse coding / block-coordinate dictionary update with
/// unit-norm column renormalization.  Rows of X are training signals.
/// Atoms that go unused are replaced by the worst-reconstructed sample.
DictLearnResult dict_learn(const Eigen::MatrixXd& X, int num_atoms, double lambda, const DictLearnOptions& opts = {});

struct DlOptions {
  double lambda = 0.0;
  double step = 0.0;  // <= 0 selects 0.99 / ||A||^2; pass 1 for denoising
  int max_iters = 300;
  double tol = 1e-8;
  SparseCodeOptions code;
};

struct DlResult {
  Eigen::VectorXd x;
  SolveStats stats;
};

/// Proximal gradient in signal space: the prox of the dictionary-coding
/// penalty at z is D * sparse_code(D, z, lambda * t).
DlResult dl_reconstruct(const Eigen::VectorXd& y, const Eigen::MatrixXd& A, const Dictionary& dict,
                        const DlOptions& opts);

struct GroupDlResult {
  Eigen::VectorXd x;
  int selected = -1;  // dictionary chosen at the final prox step
  SolveStats stats;
};

/// Union-of-dictionaries variant: each prox step codes z against every
/// dictionary and keeps the candidate with lowest 1/2 ||z - p_i||^2 +
/// lambda t ||beta_i||_1 (ties keep the lowest index).
GroupDlResult group_dl_reconstruct(const Eigen::VectorXd& y, const Eigen::MatrixXd& A,
                                   const std::vector<Dictionary>& dicts, const DlOptions& opts);

}  // namespace gmbayes
