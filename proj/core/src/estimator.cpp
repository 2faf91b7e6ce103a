#include "gmbayes/estimator.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "gmbayes/linalg.hpp"

namespace gmbayes {

Eigen::VectorXd softmax(const Eigen::VectorXd& z) {
  const double zmax = z.maxCoeff();
  Eigen::VectorXd w = (z.array() - zmax).exp();
  return w / w.sum();
}

PreparedEstimator prepare(const MixtureModel& model, const ForwardOperator& op, const NoiseModel& noise) {
  model.validate();
  const int n = model.dim();
  const int m = op.rows();
  if (op.cols() != n) throw std::invalid_argument("prepare: operator input dimension != model dimension");
  if (noise.dim() != m) throw std::invalid_argument("prepare: noise dimension != operator output dimension");

  PreparedEstimator est;
  est.n_ = n;
  est.m_ = m;

  std::vector<int> kept;
  for (int i = 0; i < model.components(); ++i) {
    if (model.weights[i] > 0.0) kept.push_back(i);
  }
  if (kept.empty()) throw std::invalid_argument("prepare: all mixture weights are zero");

  const Eigen::MatrixXd A = op.materialize();
  const Eigen::MatrixXd sigma_e = noise.covariance();
  const int L = static_cast<int>(kept.size());

  est.weights_.resize(L);
  est.log_consts_.resize(L);
  est.means_.resize(L);
  est.proj_means_.resize(L);
  est.chol_.resize(L);
  est.gains_.resize(L);

  double wsum = 0.0;
  for (int i : kept) wsum += model.weights[i];

  const double log_2pi = std::log(2.0 * std::numbers::pi);
  for (int k = 0; k < L; ++k) {
    const int i = kept[k];
    est.weights_[k] = model.weights[i] / wsum;
    est.means_[k] = model.means[i];
    est.proj_means_[k] = A * model.means[i];

    Eigen::MatrixXd S(m, m);
    if (model.has_factors()) {
      const Eigen::MatrixXd AB = A * model.factors[i];
      S = AB * AB.transpose() + sigma_e;
      est.gains_[k].left = model.factors[i];
      est.gains_[k].right = AB.transpose();
    } else {
      Eigen::MatrixXd sigma_at = model.covariances[i] * A.transpose();
      S = A * sigma_at + sigma_e;
      est.gains_[k].left = std::move(sigma_at);
    }
    S = 0.5 * (S + S.transpose());

    Eigen::LLT<Eigen::MatrixXd> llt(S);
    if (llt.info() != Eigen::Success) {
      throw std::runtime_error("prepare: Cholesky factorization failed for component " + std::to_string(i));
    }
    est.chol_[k] = llt.matrixL();
    double log_det = 0.0;
    for (int d = 0; d < m; ++d) log_det += 2.0 * std::log(est.chol_[k](d, d));
    est.log_consts_[k] = std::log(est.weights_[k]) - 0.5 * (m * log_2pi + log_det);
  }
  return est;
}

double PreparedEstimator::component_logit(const Eigen::VectorXd& y, int i) const {
  if (y.size() != m_) throw std::invalid_argument("component_logit: dimension mismatch");
  if (i < 0 || i >= components()) throw std::invalid_argument("component_logit: component index out of range");
  const Eigen::VectorXd r = y - proj_means_[i];
  const Eigen::VectorXd u = chol_[i].triangularView<Eigen::Lower>().solve(r);
  return log_consts_[i] - 0.5 * u.squaredNorm();
}

PosteriorWeights PreparedEstimator::responsibilities(const Eigen::VectorXd& y) const {
  const int L = components();
  Eigen::VectorXd z(L);
  for (int i = 0; i < L; ++i) z[i] = component_logit(y, i);
  return PosteriorWeights{softmax(z)};
}

Eigen::VectorXd PreparedEstimator::component_mean(const Eigen::VectorXd& y, int i) const {
  if (y.size() != m_) throw std::invalid_argument("component_mean: dimension mismatch");
  if (i < 0 || i >= components()) throw std::invalid_argument("component_mean: component index out of range");
  const Eigen::VectorXd r = y - proj_means_[i];
  const Eigen::VectorXd u = chol_[i].triangularView<Eigen::Lower>().solve(r);
  const Eigen::VectorXd v = chol_[i].transpose().triangularView<Eigen::Upper>().solve(u);
  return means_[i] + apply_gain(i, v);
}

Eigen::VectorXd PreparedEstimator::estimate(const Eigen::VectorXd& y) const {
  const PosteriorWeights W = responsibilities(y);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(n_);
  for (int i = 0; i < components(); ++i) {
    out += W.values[i] * component_mean(y, i);
  }
  return out;
}

Eigen::MatrixXd PreparedEstimator::estimate_batch(const Eigen::MatrixXd& Y) const {
  if (Y.cols() != m_) throw std::invalid_argument("estimate_batch: dimension mismatch");
  const int N = static_cast<int>(Y.rows());
  const int L = components();
  const Eigen::MatrixXd Yt = Y.transpose();

  // Pass 1: logits for every (component, signal).
  Eigen::MatrixXd Z(L, N);
  for (int i = 0; i < L; ++i) {
    Eigen::MatrixXd R = Yt.colwise() - proj_means_[i];
    chol_[i].triangularView<Eigen::Lower>().solveInPlace(R);
    Z.row(i) = (-0.5 * R.colwise().squaredNorm()).array() + log_consts_[i];
  }
  Eigen::RowVectorXd zmax = Z.colwise().maxCoeff();
  Eigen::MatrixXd W = (Z.rowwise() - zmax).array().exp();
  W.array().rowwise() /= W.colwise().sum().array();

  // Pass 2: weighted component means.
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n_, N);
  for (int i = 0; i < L; ++i) {
    Eigen::MatrixXd R = Yt.colwise() - proj_means_[i];
    chol_[i].triangularView<Eigen::Lower>().solveInPlace(R);
    chol_[i].transpose().triangularView<Eigen::Upper>().solveInPlace(R);
    Eigen::MatrixXd T = apply_gain(i, R);
    T.colwise() += means_[i];
    out.noalias() += T * W.row(i).asDiagonal();
  }
  return out.transpose();
}

AttentionTensors PreparedEstimator::build_attention(const Eigen::VectorXd& y) const {
  if (y.size() != m_) throw std::invalid_argument("build_attention: dimension mismatch");
  const int L = components();
  const double inv_sqrt2 = 1.0 / std::numbers::sqrt2;

  AttentionTensors att;
  att.residuals.resize(L, m_);
  att.queries.resize(L, m_);
  att.keys.resize(L, m_);
  att.values.resize(L, n_);
  att.logit_shift = std::max(0.0, -log_consts_.minCoeff());

  for (int i = 0; i < L; ++i) {
    const Eigen::VectorXd eta = y - proj_means_[i];
    const Eigen::MatrixXd S = chol_[i] * chol_[i].transpose();
    const Eigen::MatrixXd M = sym_inverse_sqrt(S);
    const Eigen::VectorXd m_eta = M * eta;
    const double c = std::sqrt((log_consts_[i] + att.logit_shift) / static_cast<double>(m_));
    att.residuals.row(i) = eta.transpose();
    att.queries.row(i) = (Eigen::VectorXd::Constant(m_, c) + inv_sqrt2 * m_eta).transpose();
    att.keys.row(i) = (Eigen::VectorXd::Constant(m_, c) - inv_sqrt2 * m_eta).transpose();
    att.values.row(i) = (means_[i] + apply_gain(i, M * m_eta)).transpose();
  }
  return att;
}

Eigen::VectorXd PreparedEstimator::estimate_attention(const Eigen::VectorXd& y) const {
  const AttentionTensors att = build_attention(y);
  const Eigen::VectorXd z = att.queries.cwiseProduct(att.keys).rowwise().sum();
  const Eigen::VectorXd w = softmax(z);
  return att.values.transpose() * w;
}

}  // namespace gmbayes
