#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <limits>
#include <vector>

#include "gmbayes/estimator.hpp"
#include "gmbayes/forward_operator.hpp"
#include "gmbayes/mixture.hpp"
#include "gmbayes/noise.hpp"

namespace gmbayes {

// Trainable parametrization of the mixture: weights through a softmax of
// free logits, covariances through factors Sigma_i = B_i B_i^T.  Both keep
// the feasible set (simplex / PSD cone) closed under unconstrained steps.
struct TrainableParams {
  Eigen::VectorXd logits;
  std::vector<Eigen::VectorXd> means;
  std::vector<Eigen::MatrixXd> factors;

  int components() const { return static_cast<int>(logits.size()); }
  int dim() const { return means.empty() ? 0 : static_cast<int>(means.front().size()); }
  int rank() const { return factors.empty() ? 0 : static_cast<int>(factors.front().cols()); }

  /// Factors are taken from the model when the rank matches, otherwise from a
  /// truncated eigendecomposition.  Padded columns get small deterministic
  /// seed values so they do not start as dead directions.
  static TrainableParams from_model(const MixtureModel& model, int rank);

  MixtureModel to_model() const;
};

struct ParamGrad {
  Eigen::VectorXd logits;
  std::vector<Eigen::VectorXd> means;
  std::vector<Eigen::MatrixXd> factors;
};

enum class Regularizer { none, nuclear, frobenius };
enum class Optimizer { adam, sgd };

struct TrainConfig {
  int epochs = 200;
  int batch_size = 64;
  double learning_rate = 1e-3;
  Optimizer optimizer = Optimizer::adam;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  Regularizer regularizer = Regularizer::none;
  double reg_weight = 0.0;
  double sup_norm_bound = std::numeric_limits<double>::infinity();  // coordinate clamp
  std::uint64_t seed = 0;
};

/// Mean squared reconstruction error (1/N) sum_j ||x_j - R_theta(y_j)||^2,
/// evaluated through the same prepared-estimator path used everywhere else.
double empirical_risk(const TrainableParams& params, const ForwardOperator& op, const NoiseModel& noise,
                      const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y);

/// Frobenius: sum_i ||Sigma_i||_F^2.  Nuclear: sum_i tr(Sigma_i) through the
/// eigenvalues of Sigma_i (PSD, so the trace equals the nuclear norm).
double regularizer_value(const TrainableParams& params, Regularizer reg);

/// Analytic gradient of empirical_risk + reg_weight * regularizer_value.
ParamGrad gradient(const TrainableParams& params, const ForwardOperator& op, const NoiseModel& noise,
                   const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y, Regularizer reg, double reg_weight);

struct EpochStats {
  int epoch = 0;      // 0 is the pre-training evaluation
  double risk = 0.0;
  double reg = 0.0;
};

struct TrainResult {
  TrainableParams params;
  MixtureModel model;
  std::vector<EpochStats> history;
};

/// Mini-batch training with per-epoch reshuffling from the config seed.
/// Deterministic: identical inputs give bit-identical histories.
TrainResult train(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y, const ForwardOperator& op,
                  const NoiseModel& noise, const TrainableParams& init, const TrainConfig& config);

void write_loss_history_csv(const std::string& path, const std::vector<EpochStats>& history);

}  // namespace gmbayes
