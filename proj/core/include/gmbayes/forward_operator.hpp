#pragma once

#include <Eigen/Dense>

namespace gmbayes {

// Linear measurement operator y = A x.  Supported forms: identity, an
// arbitrary dense matrix, and circular Gaussian blur (circulant matrix built
// from a truncated, renormalized Gaussian kernel).
class ForwardOperator {
 public:
  enum class Kind { identity, dense, gaussian_blur };

  static ForwardOperator identity(int n);
  static ForwardOperator dense(Eigen::MatrixXd A);
  /// radius < 0 selects the default ceil(4 sigma_b), clamped to n/2 - 1.
  static ForwardOperator gaussian_blur(int n, double sigma_b, int radius = -1);

  Kind kind() const { return kind_; }
  int rows() const { return rows_; }
  int cols() const { return cols_; }
  double blur_sigma() const { return sigma_b_; }
  int blur_radius() const { return radius_; }

  /// Kernel taps q_{-r..r} (blur kind only), normalized to sum 1.
  const Eigen::VectorXd& kernel() const;

  Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
  Eigen::MatrixXd materialize() const;

 private:
  ForwardOperator() = default;
  Kind kind_ = Kind::identity;
  int rows_ = 0;
  int cols_ = 0;
  Eigen::MatrixXd matrix_;   // dense kind
  Eigen::VectorXd kernel_;   // blur kind, length 2 * radius_ + 1
  double sigma_b_ = 0.0;
  int radius_ = 0;
};

}  // namespace gmbayes
