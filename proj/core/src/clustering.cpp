#include "gmbayes/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "gmbayes/kmeans.hpp"
#include "gmbayes/linalg.hpp"
#include "gmbayes/rng.hpp"

namespace gmbayes {

namespace {

constexpr std::uint64_t kStreamKMeans = 2;
constexpr std::uint64_t kStreamSubspace = 3;
constexpr int kDenseEigCutoff = 512;

Eigen::MatrixXd preprocess(const Eigen::MatrixXd& X, Preprocessing mode) {
  if (mode == Preprocessing::identity) return X;
  return finite_difference_rows(X);
}

// Top-k eigenvectors of the (symmetric) normalized affinity.  Small problems
// use a dense solve; large ones use orthogonal iteration on M + I, stopping
// when the Ritz values stabilize.
Eigen::MatrixXd top_eigenvectors(const Eigen::MatrixXd& M, int k, std::uint64_t seed) {
  const int N = static_cast<int>(M.rows());
  if (N <= kDenseEigCutoff) {
    const SymmetricEig eig = symmetric_eig(M);
    return eig.eigenvectors.leftCols(k);
  }

  const int p = std::min(N, k + 8);
  Rng rng(seed, kStreamSubspace);
  Eigen::MatrixXd Q(N, p);
  for (int j = 0; j < p; ++j)
    for (int i = 0; i < N; ++i) Q(i, j) = rng.normal();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(Q);
  Q = qr.householderQ() * Eigen::MatrixXd::Identity(N, p);

  Eigen::VectorXd prev = Eigen::VectorXd::Zero(k);
  Eigen::MatrixXd small;
  for (int iter = 0; iter < 300; ++iter) {
    Eigen::MatrixXd Y = M * Q + Q;  // (M + I) Q keeps the top of the spectrum positive
    Eigen::HouseholderQR<Eigen::MatrixXd> step(Y);
    Q = step.householderQ() * Eigen::MatrixXd::Identity(N, p);
    small = Q.transpose() * (M * Q) + Eigen::MatrixXd::Identity(p, p);
    const SymmetricEig ritz = symmetric_eig(0.5 * (small + small.transpose()));
    const Eigen::VectorXd top = ritz.eigenvalues.head(k);
    const double scale = std::max(top.cwiseAbs().maxCoeff(), 1e-30);
    if (iter > 0 && (top - prev).cwiseAbs().maxCoeff() <= 1e-10 * scale) {
      return Q * ritz.eigenvectors.leftCols(k);
    }
    prev = top;
  }
  const SymmetricEig ritz = symmetric_eig(0.5 * (small + small.transpose()));
  return Q * ritz.eigenvectors.leftCols(k);
}

ClusterResult kmeans_fallback(const Eigen::MatrixXd& X, const ClusteringConfig& cfg) {
  ClusterResult res;
  res.fallback = true;
  res.labels = kmeans(X, cfg.num_clusters, Rng(cfg.seed, kStreamKMeans), cfg.kmeans_restarts).labels;
  return res;
}

}  // namespace

Eigen::VectorXd finite_difference(const Eigen::VectorXd& x) {
  if (x.size() < 2) throw std::invalid_argument("finite_difference: need at least two samples");
  return x.tail(x.size() - 1) - x.head(x.size() - 1);
}

Eigen::MatrixXd finite_difference_rows(const Eigen::MatrixXd& X) {
  if (X.cols() < 2) throw std::invalid_argument("finite_difference_rows: need at least two columns");
  return X.rightCols(X.cols() - 1) - X.leftCols(X.cols() - 1);
}

ClusterResult subspace_cluster(const Eigen::MatrixXd& X, const ClusteringConfig& cfg) {
  if (cfg.num_clusters <= 0) throw std::invalid_argument("subspace_cluster: num_clusters must be positive");
  if (X.rows() < cfg.num_clusters) throw std::invalid_argument("subspace_cluster: fewer samples than clusters");

  const Eigen::MatrixXd Xp = preprocess(X, cfg.preprocessing);
  const int N = static_cast<int>(Xp.rows());

  const Eigen::MatrixXd G = Xp * Xp.transpose();
  double lambda = cfg.lsr_lambda;
  if (lambda <= 0.0) lambda = 1e-2 * std::max(G.trace() / N, 1e-30);

  Eigen::MatrixXd reg = G;
  reg.diagonal().array() += lambda;
  Eigen::LLT<Eigen::MatrixXd> llt(reg);
  if (llt.info() != Eigen::Success) return kmeans_fallback(Xp, cfg);
  const Eigen::MatrixXd Z = llt.solve(G);

  Eigen::MatrixXd W = Z.cwiseAbs() + Z.transpose().cwiseAbs();
  const Eigen::VectorXd deg = W.rowwise().sum();
  if (deg.minCoeff() <= 0.0) return kmeans_fallback(Xp, cfg);

  const Eigen::VectorXd dinv = deg.array().rsqrt();
  W = dinv.asDiagonal() * W * dinv.asDiagonal();

  const int k = cfg.spectral_dims > 0 ? cfg.spectral_dims : cfg.num_clusters;
  Eigen::MatrixXd embed = top_eigenvectors(0.5 * (W + W.transpose()), std::min(k, N), cfg.seed);
  for (int i = 0; i < embed.rows(); ++i) {
    const double norm = embed.row(i).norm();
    if (norm > 0.0) embed.row(i) /= norm;
  }

  ClusterResult res;
  res.labels = kmeans(embed, cfg.num_clusters, Rng(cfg.seed, kStreamKMeans), cfg.kmeans_restarts).labels;
  return res;
}

MixtureModel estimate_params(const Eigen::MatrixXd& X, const std::vector<int>& labels) {
  const int N = static_cast<int>(X.rows());
  const int n = static_cast<int>(X.cols());
  if (static_cast<int>(labels.size()) != N || N == 0) throw std::invalid_argument("estimate_params: bad label vector");

  std::vector<int> ids;
  for (int lab : labels) {
    if (lab < 0) throw std::invalid_argument("estimate_params: negative label");
    if (std::find(ids.begin(), ids.end(), lab) == ids.end()) ids.push_back(lab);
  }
  std::sort(ids.begin(), ids.end());

  MixtureModel model;
  model.weights.resize(static_cast<int>(ids.size()));
  for (size_t c = 0; c < ids.size(); ++c) {
    std::vector<int> members;
    for (int j = 0; j < N; ++j)
      if (labels[j] == ids[c]) members.push_back(j);
    const int Ni = static_cast<int>(members.size());
    model.weights[static_cast<int>(c)] = static_cast<double>(Ni) / N;

    Eigen::VectorXd mu = Eigen::VectorXd::Zero(n);
    for (int j : members) mu += X.row(j).transpose();
    mu /= Ni;

    Eigen::MatrixXd F(n, Ni);
    for (int j = 0; j < Ni; ++j) F.col(j) = (X.row(members[j]).transpose() - mu) / std::sqrt(static_cast<double>(Ni));
    if (Ni > n) F = covariance_factor(F * F.transpose());

    model.means.push_back(std::move(mu));
    model.covariances.push_back(F * F.transpose());
    model.factors.push_back(std::move(F));
  }
  model.validate();
  return model;
}

UnsupervisedFit fit_unsupervised(const Eigen::MatrixXd& X, const ClusteringConfig& cfg) {
  UnsupervisedFit fit;
  fit.clusters = subspace_cluster(X, cfg);
  fit.model = estimate_params(X, fit.clusters.labels);
  return fit;
}

PreparedEstimator fit_unsupervised(const Eigen::MatrixXd& X, const ForwardOperator& op, const NoiseModel& noise,
                                   const ClusteringConfig& cfg) {
  return prepare(fit_unsupervised(X, cfg).model, op, noise);
}

}  // namespace gmbayes
