#pragma once

#include <Eigen/Dense>
#include <vector>

#include "gmbayes/rng.hpp"

namespace gmbayes {

// Gaussian mixture prior, possibly degenerate: covariances may be rank
// deficient (signals supported on unions of low-dimensional subspaces).
// When `factors` is non-empty, factors[i] is an n x r_i matrix B_i with
// Sigma_i = B_i B_i^T; the factor form is what samplers and training use.
struct MixtureModel {
  Eigen::VectorXd weights;
  std::vector<Eigen::VectorXd> means;
  std::vector<Eigen::MatrixXd> covariances;
  std::vector<Eigen::MatrixXd> factors;  // optional, same length as means when present

  int components() const { return static_cast<int>(weights.size()); }
  int dim() const { return means.empty() ? 0 : static_cast<int>(means.front().size()); }
  bool has_factors() const { return !factors.empty(); }

  /// Throws std::invalid_argument when any structural invariant fails:
  /// simplex weights (1e-12), symmetric PSD covariances, consistent shapes,
  /// factors reproducing covariances within 1e-10 relative Frobenius.
  void validate() const;
};

/// Mixture of coordinate-subspace Gaussians: zero means, uniform weights,
/// Sigma_i with unit diagonal on supports[i] and zeros elsewhere.
MixtureModel mixture_from_coordinate_supports(int n, const std::vector<std::vector<int>>& supports);

struct SampleSet {
  Eigen::MatrixXd signals;  // one signal per row
  std::vector<int> labels;  // generating component per row
};

/// Draws `count` signals.  Each signal uses the derived stream rng.derive(j),
/// so output is independent of evaluation order and batch splits.
SampleSet sample_mixture(const MixtureModel& model, const Rng& rng, int count);

/// Factor F with F F^T = Sigma (eigendecomposition, rank-truncated at
/// 1e-12 * lambda_max).  Columns scaled by sqrt(eigenvalue).
Eigen::MatrixXd covariance_factor(const Eigen::MatrixXd& sigma);

}  // namespace gmbayes
