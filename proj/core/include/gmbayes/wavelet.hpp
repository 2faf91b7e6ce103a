#pragma once

#include <Eigen/Dense>
#include <array>
#include <vector>

namespace gmbayes {

/// Daubechies-6 lowpass filter, sqrt(2)-normalized (sum of taps = sqrt(2)).
extern const std::array<double, 12> kDb6Lowpass;

struct WaveletBasis {
  int levels = 5;
};

/// Periodic multilevel DWT.  Coefficient layout: [a_L | d_L | ... | d_1]
/// (coarsest approximation first, then detail bands coarse to fine).
/// Requires the length divisible by 2^levels.
Eigen::VectorXd dwt(const Eigen::VectorXd& x, const WaveletBasis& basis);
Eigen::VectorXd idwt(const Eigen::VectorXd& coeffs, const WaveletBasis& basis);

/// Orthogonal synthesis matrix W with x = W * coeffs.
Eigen::MatrixXd wavelet_synthesis_matrix(int n, const WaveletBasis& basis);

struct BasisSplit {
  std::vector<int> fixed;   // coefficients held out of the sparsity penalty
  std::vector<int> sparse;  // penalized / thresholded coefficients
};

/// Split of the coefficient indices by transform depth: the approximation
/// content at depth `coarse_levels` (the first n / 2^coarse_levels indices)
/// is fixed, everything below is sparse.  coarse_levels = 0 fixes nothing;
/// coarse_levels = levels fixes exactly the a_L band.
BasisSplit known_basis_split(int n, const WaveletBasis& basis, int coarse_levels);

}  // namespace gmbayes
