#pragma once

#include <Eigen/Dense>
#include <vector>

#include "gmbayes/lasso.hpp"
#include "gmbayes/prox.hpp"

namespace gmbayes {

/// Orthonormal basis from the eigendecomposition of the empirical covariance
/// of the rows of X (centered, divisor N), eigenvalues descending, column
/// signs fixed so the largest-magnitude entry is positive.
Eigen::MatrixXd svd_basis(const Eigen::MatrixXd& X);

struct GroupBasisSet {
  std::vector<Eigen::MatrixXd> bases;        // full n x n eigenvector bases per cluster
  std::vector<Eigen::VectorXd> eigenvalues;  // matching spectra, descending
  std::vector<Eigen::MatrixXd> penalties;    // K_i = (Sigma_i + eps I)^{-1/2}
  bool fallback = false;                     // some cluster was too small, global basis used

  /// Leading-s columns of every cluster basis, for subspace-union projections.
  std::vector<Eigen::MatrixXd> frames(int s) const;
  GroupBases group_bases() const { return GroupBases{bases, penalties}; }
};

/// Per-cluster empirical covariance eigendecompositions.  eps is relative to
/// the mean diagonal of each covariance; clusters with fewer than two samples
/// trigger the global fallback for every cluster.
GroupBasisSet group_svd_bases(const Eigen::MatrixXd& X, const std::vector<int>& labels, double eps_rel = 1e-8);

}  // namespace gmbayes
