#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

namespace gmbayes {

/// ||x - xhat||^2 / ||x||^2 for one signal.
inline double relative_mse(const Eigen::VectorXd& x, const Eigen::VectorXd& xhat) {
  if (x.size() != xhat.size()) throw std::invalid_argument("relative_mse: size mismatch");
  const double denom = x.squaredNorm();
  if (denom <= 0.0) throw std::invalid_argument("relative_mse: zero reference signal");
  return (x - xhat).squaredNorm() / denom;
}

/// Per-row relative MSE; rows of X are reference signals.
inline Eigen::VectorXd relative_mse_rows(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Xhat) {
  if (X.rows() != Xhat.rows() || X.cols() != Xhat.cols()) throw std::invalid_argument("relative_mse: shape mismatch");
  Eigen::VectorXd out(X.rows());
  for (int j = 0; j < X.rows(); ++j) out[j] = relative_mse(X.row(j).transpose(), Xhat.row(j).transpose());
  return out;
}

inline double mean(const Eigen::VectorXd& v) {
  if (v.size() == 0) throw std::invalid_argument("mean: empty vector");
  return v.mean();
}

/// Standard error of the mean (sample standard deviation / sqrt(count)).
inline double standard_error(const Eigen::VectorXd& v) {
  if (v.size() < 2) return 0.0;
  const double m = v.mean();
  const double var = (v.array() - m).square().sum() / (v.size() - 1);
  return std::sqrt(var / v.size());
}

}  // namespace gmbayes
