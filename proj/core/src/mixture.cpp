#include "gmbayes/mixture.hpp"

#include <cmath>
#include <set>
#include <stdexcept>
#include <string>

#include "gmbayes/linalg.hpp"

namespace gmbayes {

void MixtureModel::validate() const {
  const int L = components();
  if (L == 0) throw std::invalid_argument("MixtureModel: no components");
  if (static_cast<int>(means.size()) != L || static_cast<int>(covariances.size()) != L) {
    throw std::invalid_argument("MixtureModel: weights/means/covariances length mismatch");
  }
  if (!factors.empty() && static_cast<int>(factors.size()) != L) {
    throw std::invalid_argument("MixtureModel: factors length mismatch");
  }
  if (weights.minCoeff() < 0.0) throw std::invalid_argument("MixtureModel: negative weight");
  if (std::abs(weights.sum() - 1.0) > 1e-12) {
    throw std::invalid_argument("MixtureModel: weights must sum to 1 within 1e-12");
  }
  const int n = dim();
  for (int i = 0; i < L; ++i) {
    if (means[i].size() != n) throw std::invalid_argument("MixtureModel: mean dimension mismatch");
    const Eigen::MatrixXd& sigma = covariances[i];
    if (sigma.rows() != n || sigma.cols() != n) {
      throw std::invalid_argument("MixtureModel: covariance shape mismatch");
    }
    const double scale = std::max(sigma.cwiseAbs().maxCoeff(), 1.0);
    if ((sigma - sigma.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
      throw std::invalid_argument("MixtureModel: covariance not symmetric (component " + std::to_string(i) + ")");
    }
    Eigen::LLT<Eigen::MatrixXd> llt(psd_jitter(sigma));
    if (llt.info() != Eigen::Success) {
      throw std::invalid_argument("MixtureModel: covariance not PSD (component " + std::to_string(i) + ")");
    }
    if (!factors.empty()) {
      const Eigen::MatrixXd& B = factors[i];
      if (B.rows() != n) throw std::invalid_argument("MixtureModel: factor row dimension mismatch");
      const Eigen::MatrixXd rebuilt = B * B.transpose();
      const double denom = std::max(sigma.norm(), 1e-300);
      if ((rebuilt - sigma).norm() > 1e-10 * denom) {
        throw std::invalid_argument("MixtureModel: factor form does not reproduce covariance (component " +
                                    std::to_string(i) + ")");
      }
    }
  }
}

MixtureModel mixture_from_coordinate_supports(int n, const std::vector<std::vector<int>>& supports) {
  if (n <= 0) throw std::invalid_argument("mixture_from_coordinate_supports: n must be positive");
  const int L = static_cast<int>(supports.size());
  if (L == 0) throw std::invalid_argument("mixture_from_coordinate_supports: no supports");
  MixtureModel model;
  model.weights = Eigen::VectorXd::Constant(L, 1.0 / L);
  model.means.assign(L, Eigen::VectorXd::Zero(n));
  model.covariances.reserve(L);
  model.factors.reserve(L);
  for (const auto& support : supports) {
    std::set<int> seen;
    Eigen::MatrixXd sigma = Eigen::MatrixXd::Zero(n, n);
    Eigen::MatrixXd factor = Eigen::MatrixXd::Zero(n, static_cast<int>(support.size()));
    int col = 0;
    for (int idx : support) {
      if (idx < 0 || idx >= n) throw std::invalid_argument("mixture_from_coordinate_supports: index out of range");
      if (!seen.insert(idx).second) {
        throw std::invalid_argument("mixture_from_coordinate_supports: duplicate index in support");
      }
      sigma(idx, idx) = 1.0;
      factor(idx, col++) = 1.0;
    }
    model.covariances.push_back(std::move(sigma));
    model.factors.push_back(std::move(factor));
  }
  return model;
}

Eigen::MatrixXd covariance_factor(const Eigen::MatrixXd& sigma) {
  SymmetricEig eig = symmetric_eig(sigma);
  const double lambda_max = eig.eigenvalues.size() > 0 ? std::max(eig.eigenvalues[0], 0.0) : 0.0;
  const double cutoff = 1e-12 * lambda_max;
  int rank = 0;
  while (rank < eig.eigenvalues.size() && eig.eigenvalues[rank] > cutoff) ++rank;
  Eigen::MatrixXd factor(sigma.rows(), rank);
  for (int k = 0; k < rank; ++k) {
    factor.col(k) = eig.eigenvectors.col(k) * std::sqrt(eig.eigenvalues[k]);
  }
  return factor;
}

namespace {

int sample_label(const Eigen::VectorXd& weights, double u) {
  double cum = 0.0;
  const int L = static_cast<int>(weights.size());
  for (int i = 0; i < L; ++i) {
    cum += weights[i];
    if (u < cum) return i;
  }
  // Guard against cumulative rounding; never reached for u in [0, 1) with
  // exact simplex weights.
  for (int i = L - 1; i >= 0; --i) {
    if (weights[i] > 0.0) return i;
  }
  return L - 1;
}

}  // namespace

SampleSet sample_mixture(const MixtureModel& model, const Rng& rng, int count) {
  model.validate();
  if (count < 0) throw std::invalid_argument("sample_mixture: negative count");
  const int L = model.components();
  const int n = model.dim();

  std::vector<Eigen::MatrixXd> comp_factors(L);
  for (int i = 0; i < L; ++i) {
    comp_factors[i] = model.has_factors() ? model.factors[i] : covariance_factor(model.covariances[i]);
  }

  SampleSet out;
  out.signals.resize(count, n);
  out.labels.resize(count);
  for (int j = 0; j < count; ++j) {
    Rng stream = rng.derive(static_cast<std::uint64_t>(j));
    const int label = sample_label(model.weights, stream.uniform());
    const Eigen::MatrixXd& factor = comp_factors[label];
    Eigen::VectorXd g(factor.cols());
    for (Eigen::Index k = 0; k < g.size(); ++k) g[k] = stream.normal();
    out.signals.row(j) = (model.means[label] + factor * g).transpose();
    out.labels[j] = label;
  }
  return out;
}

}  // namespace gmbayes
