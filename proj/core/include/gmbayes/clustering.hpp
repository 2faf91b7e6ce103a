#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "gmbayes/estimator.hpp"
#include "gmbayes/forward_operator.hpp"
#include "gmbayes/mixture.hpp"
#include "gmbayes/noise.hpp"

namespace gmbayes {

enum class Preprocessing { identity, finite_difference };

struct ClusteringConfig {
  int num_clusters = 0;
  double lsr_lambda = 0.0;  // <= 0 selects 1e-2 * mean squared sample norm
  Preprocessing preprocessing = Preprocessing::identity;
  int spectral_dims = 0;  // <= 0 selects num_clusters
  int kmeans_restarts = 10;
  std::uint64_t seed = 0;
};

struct ClusterResult {
  std::vector<int> labels;
  bool fallback = false;  // degenerate affinity, plain k-means on raw rows
};

/// First-order forward differences, length n-1.
Eigen::VectorXd finite_difference(const Eigen::VectorXd& x);
Eigen::MatrixXd finite_difference_rows(const Eigen::MatrixXd& X);

/// Least-squares-regression self-expression Z = (X X^T + lambda I)^{-1} X X^T
/// over sample rows, affinity |Z| + |Z^T|, normalized spectral embedding,
/// row normalization, then seeded k-means.
ClusterResult subspace_cluster(const Eigen::MatrixXd& X, const ClusteringConfig& config);

/// Per-cluster empirical weights / means / covariances (biased divisor N_i).
/// Covariances are stored in factor form F F^T with F built directly from the
/// centered samples, so degenerate directions stay exactly degenerate.
/// Clusters that receive no samples are dropped and weights renormalized.
MixtureModel estimate_params(const Eigen::MatrixXd& X, const std::vector<int>& labels);

struct UnsupervisedFit {
  MixtureModel model;
  ClusterResult clusters;
};

UnsupervisedFit fit_unsupervised(const Eigen::MatrixXd& X, const ClusteringConfig& config);

/// Convenience wrapper that also prepares the estimator for (op, noise).
PreparedEstimator fit_unsupervised(const Eigen::MatrixXd& X, const ForwardOperator& op, const NoiseModel& noise,
                                   const ClusteringConfig& config);

}  // namespace gmbayes
