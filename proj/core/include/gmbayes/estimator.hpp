#pragma once

#include <Eigen/Dense>
#include <vector>

#include "gmbayes/forward_operator.hpp"
#include "gmbayes/mixture.hpp"
#include "gmbayes/noise.hpp"

namespace gmbayes {

struct PosteriorWeights {
  Eigen::VectorXd values;  // simplex over mixture components
};

// Attention-form tensors of the estimator.  Row i of each matrix belongs to
// component i.  All component logits are shifted by the common `logit_shift`
// (softmax-invariant) so the square roots in the query/key constants stay
// real when some logit is negative.
struct AttentionTensors {
  Eigen::MatrixXd residuals;  // L x m, eta_i = y - A mu_i
  Eigen::MatrixXd queries;    // L x m
  Eigen::MatrixXd keys;       // L x m
  Eigen::MatrixXd values;     // L x n
  double logit_shift = 0.0;
};

// Closed-form posterior-mean estimator for y = A x + eps under a Gaussian
// mixture prior.  All per-component precomputation (Cholesky factors of
// S_i = A Sigma_i A^T + Sigma_E, gains Sigma_i A^T, log-normalizers) happens
// in prepare(); evaluation never forms an explicit inverse.
class PreparedEstimator {
 public:
  int components() const { return static_cast<int>(log_consts_.size()); }
  int input_dim() const { return m_; }
  int output_dim() const { return n_; }

  const Eigen::VectorXd& weights() const { return weights_; }
  const Eigen::VectorXd& log_consts() const { return log_consts_; }
  const Eigen::MatrixXd& cholesky(int i) const { return chol_[i]; }
  const Eigen::VectorXd& mean(int i) const { return means_[i]; }

  /// z_i(y) = l_i - 0.5 || C_i^{-1} (y - A mu_i) ||^2.
  double component_logit(const Eigen::VectorXd& y, int i) const;

  /// softmax over component logits; finite for arbitrarily large ||y||.
  PosteriorWeights responsibilities(const Eigen::VectorXd& y) const;

  /// t_i(y) = mu_i + Sigma_i A^T S_i^{-1} (y - A mu_i), via two triangular solves.
  Eigen::VectorXd component_mean(const Eigen::VectorXd& y, int i) const;

  Eigen::VectorXd estimate(const Eigen::VectorXd& y) const;

  /// Row-wise batch evaluation; identical values to estimate() per row.
  Eigen::MatrixXd estimate_batch(const Eigen::MatrixXd& Y) const;

  AttentionTensors build_attention(const Eigen::VectorXd& y) const;

  /// softmax((Q . K) 1_m)^T V; agrees with estimate() to rounding error.
  Eigen::VectorXd estimate_attention(const Eigen::VectorXd& y) const;

  friend PreparedEstimator prepare(const MixtureModel&, const ForwardOperator&, const NoiseModel&);

 private:
  // Gain Sigma_i A^T, kept factored as B_i (A B_i)^T when the model carries
  // factors (low-rank components at high dimension would not fit densely).
  struct Gain {
    Eigen::MatrixXd left;   // n x m (dense) or n x r (factored)
    Eigen::MatrixXd right;  // empty (dense) or r x m (factored)
  };

  Eigen::MatrixXd apply_gain(int i, const Eigen::MatrixXd& v) const {
    const Gain& g = gains_[i];
    if (g.right.size() == 0) return g.left * v;
    return g.left * (g.right * v);
  }

  int m_ = 0;
  int n_ = 0;
  Eigen::VectorXd weights_;                  // zero-weight components dropped, renormalized
  Eigen::VectorXd log_consts_;               // l_i = log w_i - 0.5 (n log 2pi + log det S_i)
  std::vector<Eigen::VectorXd> means_;       // mu_i
  std::vector<Eigen::VectorXd> proj_means_;  // A mu_i
  std::vector<Eigen::MatrixXd> chol_;        // lower Cholesky of S_i
  std::vector<Gain> gains_;
};

PreparedEstimator prepare(const MixtureModel& model, const ForwardOperator& op, const NoiseModel& noise);

/// Numerically stable softmax (max subtraction).
Eigen::VectorXd softmax(const Eigen::VectorXd& z);

}  // namespace gmbayes
