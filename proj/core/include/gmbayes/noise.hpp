#pragma once

#include <Eigen/Dense>

#include "gmbayes/rng.hpp"

namespace gmbayes {

// Additive Gaussian measurement noise with invertible covariance.
class NoiseModel {
 public:
  static NoiseModel isotropic(int dim, double sigma);
  static NoiseModel full(Eigen::MatrixXd covariance);

  int dim() const { return dim_; }
  bool is_isotropic() const { return isotropic_; }
  double sigma() const { return sigma_; }
  Eigen::MatrixXd covariance() const;

  /// Lower Cholesky factor of the covariance.
  const Eigen::MatrixXd& cholesky() const { return chol_; }

 private:
  NoiseModel() = default;
  int dim_ = 0;
  bool isotropic_ = true;
  double sigma_ = 0.0;
  Eigen::MatrixXd cov_;
  Eigen::MatrixXd chol_;
};

/// count x dim matrix of noise draws, one derived stream per row.
Eigen::MatrixXd sample_noise(const NoiseModel& noise, const Rng& rng, int count);

}  // namespace gmbayes
