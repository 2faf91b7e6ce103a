#pragma once

#include <Eigen/Dense>
#include <vector>

namespace gmbayes {

double soft_threshold(double v, double t);
Eigen::VectorXd soft_threshold(const Eigen::VectorXd& v, double t);

// Feasible set for hard-thresholding projections.  Either the classic
// "s largest magnitudes" set (with optional passthrough coordinates that are
// always kept and never counted against s), or a union of subspaces given by
// orthonormal frames or coordinate index sets.
struct SparsitySet {
  enum class Kind { top_s, subspace_union };
  Kind kind = Kind::top_s;
  int s = 0;
  std::vector<int> passthrough;                // top_s only
  std::vector<Eigen::MatrixXd> frames;         // orthonormal columns, subspace_union
  std::vector<std::vector<int>> index_sets;    // coordinate subspaces, subspace_union

  static SparsitySet top_s(int s);
  static SparsitySet top_s_with_passthrough(int s, std::vector<int> passthrough);
  static SparsitySet subspace_union_frames(std::vector<Eigen::MatrixXd> frames);
  static SparsitySet subspace_union_indices(std::vector<std::vector<int>> sets);
};

/// Euclidean projection onto the sparsity set.  Magnitude ties keep the
/// lowest index; subspace score ties keep the lowest subspace index.
Eigen::VectorXd project_sparse(const Eigen::VectorXd& beta, const SparsitySet& set);

/// prox_{tau ||K .||_2}(beta).  K must be symmetric PSD.  If the minimum-norm
/// solution of K K^T u = K beta has norm <= tau the range component is removed
/// entirely; otherwise the shrinkage parameter solves
/// ||(K K^T + alpha I)^{-1} K K^T beta|| = tau by bisection to 1e-12 relative
/// bracket width.
Eigen::VectorXd prox_weighted_l2(const Eigen::VectorXd& beta, const Eigen::MatrixXd& K, double tau);

// Reusable eigendecomposition of one penalty matrix, for solvers that apply
// the prox with the same K many times.
class WeightedL2Prox {
 public:
  explicit WeightedL2Prox(const Eigen::MatrixXd& K);
  Eigen::VectorXd apply(const Eigen::VectorXd& beta, double tau) const;
  /// Penalty value ||K beta||_2.
  double penalty(const Eigen::VectorXd& beta) const;

 private:
  Eigen::MatrixXd vectors_;
  Eigen::VectorXd values_;
};

}  // namespace gmbayes
