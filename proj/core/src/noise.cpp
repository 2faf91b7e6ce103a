#include "gmbayes/noise.hpp"

#include <stdexcept>

namespace gmbayes {

NoiseModel NoiseModel::isotropic(int dim, double sigma) {
  if (dim <= 0) throw std::invalid_argument("NoiseModel::isotropic: dim must be positive");
  if (!(sigma > 0.0)) throw std::invalid_argument("NoiseModel::isotropic: sigma must be positive");
  NoiseModel noise;
  noise.dim_ = dim;
  noise.isotropic_ = true;
  noise.sigma_ = sigma;
  noise.chol_ = Eigen::MatrixXd::Identity(dim, dim) * sigma;
  return noise;
}

NoiseModel NoiseModel::full(Eigen::MatrixXd covariance) {
  if (covariance.rows() != covariance.cols() || covariance.rows() == 0) {
    throw std::invalid_argument("NoiseModel::full: covariance must be square and non-empty");
  }
  const double scale = std::max(covariance.cwiseAbs().maxCoeff(), 1e-300);
  if ((covariance - covariance.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw std::invalid_argument("NoiseModel::full: covariance not symmetric");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(covariance);
  if (llt.info() != Eigen::Success) {
    throw std::invalid_argument("NoiseModel::full: covariance not positive definite");
  }
  NoiseModel noise;
  noise.dim_ = static_cast<int>(covariance.rows());
  noise.isotropic_ = false;
  noise.cov_ = std::move(covariance);
  noise.chol_ = llt.matrixL();
  return noise;
}

Eigen::MatrixXd NoiseModel::covariance() const {
  if (isotropic_) return Eigen::MatrixXd::Identity(dim_, dim_) * (sigma_ * sigma_);
  return cov_;
}

Eigen::MatrixXd sample_noise(const NoiseModel& noise, const Rng& rng, int count) {
  if (count < 0) throw std::invalid_argument("sample_noise: negative count");
  const int m = noise.dim();
  Eigen::MatrixXd out(count, m);
  for (int j = 0; j < count; ++j) {
    Rng stream = rng.derive(static_cast<std::uint64_t>(j));
    Eigen::VectorXd g(m);
    for (int k = 0; k < m; ++k) g[k] = stream.normal();
    if (noise.is_isotropic()) {
      out.row(j) = (noise.sigma() * g).transpose();
    } else {
      out.row(j) = (noise.cholesky() * g).transpose();
    }
  }
  return out;
}

}  // namespace gmbayes
