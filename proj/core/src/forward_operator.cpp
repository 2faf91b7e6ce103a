#include "gmbayes/forward_operator.hpp"

#include <cmath>
#include <stdexcept>

namespace gmbayes {

ForwardOperator ForwardOperator::identity(int n) {
  if (n <= 0) throw std::invalid_argument("ForwardOperator::identity: n must be positive");
  ForwardOperator op;
  op.kind_ = Kind::identity;
  op.rows_ = op.cols_ = n;
  return op;
}

ForwardOperator ForwardOperator::dense(Eigen::MatrixXd A) {
  if (A.rows() == 0 || A.cols() == 0) throw std::invalid_argument("ForwardOperator::dense: empty matrix");
  ForwardOperator op;
  op.kind_ = Kind::dense;
  op.rows_ = static_cast<int>(A.rows());
  op.cols_ = static_cast<int>(A.cols());
  op.matrix_ = std::move(A);
  return op;
}

ForwardOperator ForwardOperator::gaussian_blur(int n, double sigma_b, int radius) {
  if (n <= 1) throw std::invalid_argument("ForwardOperator::gaussian_blur: n must exceed 1");
  if (sigma_b <= 0.0) throw std::invalid_argument("ForwardOperator::gaussian_blur: sigma_b must be positive");
  const int max_radius = n / 2 - 1;
  if (radius < 0) radius = static_cast<int>(std::ceil(4.0 * sigma_b));
  radius = std::min(radius, std::max(max_radius, 0));
  ForwardOperator op;
  op.kind_ = Kind::gaussian_blur;
  op.rows_ = op.cols_ = n;
  op.sigma_b_ = sigma_b;
  op.radius_ = radius;
  op.kernel_.resize(2 * radius + 1);
  for (int k = -radius; k <= radius; ++k) {
    op.kernel_[k + radius] = std::exp(-0.5 * (static_cast<double>(k) * k) / (sigma_b * sigma_b));
  }
  op.kernel_ /= op.kernel_.sum();
  return op;
}

const Eigen::VectorXd& ForwardOperator::kernel() const {
  if (kind_ != Kind::gaussian_blur) throw std::logic_error("ForwardOperator::kernel: not a blur operator");
  return kernel_;
}

Eigen::VectorXd ForwardOperator::apply(const Eigen::VectorXd& x) const {
  if (x.size() != cols_) throw std::invalid_argument("ForwardOperator::apply: dimension mismatch");
  switch (kind_) {
    case Kind::identity:
      return x;
    case Kind::dense:
      return matrix_ * x;
    case Kind::gaussian_blur: {
      const int n = cols_;
      Eigen::VectorXd y = Eigen::VectorXd::Zero(n);
      for (int i = 0; i < n; ++i) {
        double acc = 0.0;
        for (int k = -radius_; k <= radius_; ++k) {
          const int j = ((i - k) % n + n) % n;
          acc += kernel_[k + radius_] * x[j];
        }
        y[i] = acc;
      }
      return y;
    }
  }
  throw std::logic_error("ForwardOperator::apply: unknown kind");
}

Eigen::MatrixXd ForwardOperator::materialize() const {
  switch (kind_) {
    case Kind::identity:
      return Eigen::MatrixXd::Identity(rows_, cols_);
    case Kind::dense:
      return matrix_;
    case Kind::gaussian_blur: {
      const int n = cols_;
      Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
      for (int i = 0; i < n; ++i) {
        for (int k = -radius_; k <= radius_; ++k) {
          const int j = ((i - k) % n + n) % n;
          A(i, j) += kernel_[k + radius_];
        }
      }
      return A;
    }
  }
  throw std::logic_error("ForwardOperator::materialize: unknown kind");
}

}  // namespace gmbayes
