#include "gmbayes/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "gmbayes/linalg.hpp"

namespace gmbayes {

Eigen::VectorXd posterior_mean_oracle(const MixtureModel& model, const ForwardOperator& op,
                                      const NoiseModel& noise, const Eigen::VectorXd& y,
                                      const QuadratureSpec& spec) {
  model.validate();
  const int n = model.dim();
  const int m = op.rows();
  if (n > 3) throw std::invalid_argument("posterior_mean_oracle: supported for n <= 3 only");
  if (op.cols() != n || noise.dim() != m || y.size() != m) {
    throw std::invalid_argument("posterior_mean_oracle: dimension mismatch");
  }
  if (spec.points_per_dim < 8) throw std::invalid_argument("posterior_mean_oracle: grid too small");

  const Eigen::MatrixXd A = op.materialize();
  // Whitened noise residual: common normalization constants cancel in the
  // posterior ratio, only the exponent matters.
  const Eigen::MatrixXd noise_chol = noise.cholesky();
  const auto whiten = [&](const Eigen::VectorXd& e) {
    return noise_chol.triangularView<Eigen::Lower>().solve(e).eval();
  };

  Eigen::VectorXd numerator = Eigen::VectorXd::Zero(n);
  double denominator = 0.0;

  for (int i = 0; i < model.components(); ++i) {
    const double w = model.weights[i];
    if (w <= 0.0) continue;

    SymmetricEig eig = symmetric_eig(model.covariances[i]);
    const double lambda_max = std::max(eig.eigenvalues.maxCoeff(), 0.0);
    const double cutoff = 1e-12 * std::max(lambda_max, 1e-300);
    int rank = 0;
    while (rank < n && eig.eigenvalues[rank] > cutoff) ++rank;

    const Eigen::VectorXd eta_white = whiten(y - A * model.means[i]);

    if (rank == 0) {
      // Point mass at the mean.
      const double density = std::exp(-0.5 * eta_white.squaredNorm());
      numerator += w * density * model.means[i];
      denominator += w * density;
      continue;
    }

    const Eigen::MatrixXd V = eig.eigenvectors.leftCols(rank);
    Eigen::VectorXd sigmas(rank);
    for (int k = 0; k < rank; ++k) sigmas[k] = std::sqrt(eig.eigenvalues[k]);
    const Eigen::MatrixXd AV_white = noise_chol.triangularView<Eigen::Lower>().solve((A * V).eval());

    const int G = spec.points_per_dim;
    double log_norm = -0.5 * rank * std::log(2.0 * std::numbers::pi);
    for (int k = 0; k < rank; ++k) log_norm -= std::log(sigmas[k]);
    const double norm_const = std::exp(log_norm);

    Eigen::VectorXd step(rank), origin(rank);
    double cell = 1.0;
    for (int k = 0; k < rank; ++k) {
      const double half = spec.half_width_sigmas * sigmas[k];
      step[k] = 2.0 * half / G;
      origin[k] = -half + 0.5 * step[k];
      cell *= step[k];
    }

    double mass = 0.0, comp_den = 0.0;
    Eigen::VectorXd comp_num = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd xi(rank);
    long total = 1;
    for (int k = 0; k < rank; ++k) total *= G;
    for (long flat = 0; flat < total; ++flat) {
      long rem = flat;
      double quad = 0.0;
      for (int k = 0; k < rank; ++k) {
        xi[k] = origin[k] + step[k] * static_cast<double>(rem % G);
        rem /= G;
        quad += (xi[k] / sigmas[k]) * (xi[k] / sigmas[k]);
      }
      const double prior = norm_const * std::exp(-0.5 * quad);
      mass += prior;
      const double like = std::exp(-0.5 * (eta_white - AV_white * xi).squaredNorm());
      const double joint = prior * like;
      comp_den += joint;
      comp_num += joint * (model.means[i] + V * xi);
    }
    mass *= cell;
    if (std::abs(mass - 1.0) > 0.01) {
      throw std::runtime_error("posterior_mean_oracle: grid mass check failed (coarse grid or truncated tails)");
    }
    numerator += w * cell * comp_num;
    denominator += w * cell * comp_den;
  }

  if (!(denominator > 0.0) || !std::isfinite(denominator)) {
    throw std::runtime_error("posterior_mean_oracle: marginal density underflow at y");
  }
  return numerator / denominator;
}

}  // namespace gmbayes
