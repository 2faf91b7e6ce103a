#pragma once

#include <Eigen/Dense>

namespace gmbayes {

/// Largest singular value of B, estimated with `iters` power iterations on
/// B^T B from a fixed deterministic start vector.  Underestimates by
/// construction, which is the safe direction for step-size bounds.
double spectral_norm_estimate(const Eigen::MatrixXd& B, int iters = 50);

struct SymmetricEig {
  Eigen::VectorXd eigenvalues;   // descending
  Eigen::MatrixXd eigenvectors;  // columns, sign-fixed (largest |entry| positive)
};

/// Eigendecomposition of a symmetric matrix with deterministic ordering/signs.
SymmetricEig symmetric_eig(const Eigen::MatrixXd& M);

/// S^{-1/2} for symmetric positive semi-definite S.  Eigenvalues below
/// floor_rel * lambda_max are clamped to the floor before inversion.
Eigen::MatrixXd sym_inverse_sqrt(const Eigen::MatrixXd& S, double floor_rel = 1e-12);

/// Symmetrize and add the standard jitter delta = jitter_rel * trace / n
/// to the diagonal; used before Cholesky factorizations of empirical matrices.
Eigen::MatrixXd psd_jitter(const Eigen::MatrixXd& S, double jitter_rel = 1e-12);

}  // namespace gmbayes
