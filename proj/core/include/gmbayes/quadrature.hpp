#pragma once

#include <Eigen/Dense>

#include "gmbayes/forward_operator.hpp"
#include "gmbayes/mixture.hpp"
#include "gmbayes/noise.hpp"

namespace gmbayes {

struct QuadratureSpec {
  int points_per_dim = 240;
  double half_width_sigmas = 8.0;  // integration extent per latent dimension
};

/// Posterior mean E[X | Y = y] by direct tensor-grid quadrature over each
/// component's support (eigenbasis of Sigma_i, midpoint rule).  Intended as a
/// slow reference for small dimensions (n <= 3); completely independent of
/// the closed-form evaluation path.  Throws when the per-component Gaussian
/// mass check deviates from 1 by more than 1% (grid too coarse) or the
/// marginal density underflows at y.
Eigen::VectorXd posterior_mean_oracle(const MixtureModel& model, const ForwardOperator& op,
                                      const NoiseModel& noise, const Eigen::VectorXd& y,
                                      const QuadratureSpec& spec = {});

}  // namespace gmbayes
