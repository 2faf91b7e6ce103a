#include "gmbayes/train.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "gmbayes/linalg.hpp"
#include "gmbayes/rng.hpp"
#include "gmbayes/signal_io.hpp"

namespace gmbayes {

namespace {

Eigen::VectorXd softmax_vec(const Eigen::VectorXd& z) {
  const Eigen::VectorXd shifted = (z.array() - z.maxCoeff()).exp();
  return shifted / shifted.sum();
}

void check_shapes(const TrainableParams& p) {
  const int L = p.components();
  if (L == 0) throw std::invalid_argument("train: empty parameter set");
  if (static_cast<int>(p.means.size()) != L || static_cast<int>(p.factors.size()) != L)
    throw std::invalid_argument("train: logits/means/factors disagree on component count");
  const int n = static_cast<int>(p.means.front().size());
  const int r = static_cast<int>(p.factors.front().cols());
  for (int i = 0; i < L; ++i) {
    if (p.means[i].size() != n) throw std::invalid_argument("train: inconsistent mean dimension");
    if (p.factors[i].rows() != n || p.factors[i].cols() != r)
      throw std::invalid_argument("train: inconsistent factor shape");
  }
}

struct ComponentWork {
  Eigen::VectorXd a_mu;       // A mu_i
  Eigen::MatrixXd ab;         // A B_i
  Eigen::MatrixXd precision;  // S_i^{-1}
  double log_const = 0.0;     // l_i
};

// Shared forward quantities for a batch; everything downstream of the
// Cholesky factors is kept in factored form to avoid n x n intermediates.
struct BatchForward {
  std::vector<Eigen::MatrixXd> U;  // S_i^{-1} (y - A mu_i), m x b
  std::vector<Eigen::MatrixXd> T;  // posterior component means, n x b
  Eigen::MatrixXd W;               // responsibilities, L x b
  Eigen::MatrixXd E;               // residuals R(y) - x, n x b
  double risk = 0.0;               // (1/b) sum ||e||^2
};

std::vector<ComponentWork> component_work(const TrainableParams& params, const Eigen::MatrixXd& A,
                                          const Eigen::MatrixXd& noise_cov) {
  const int L = params.components();
  const int m = static_cast<int>(A.rows());
  const Eigen::VectorXd w = softmax_vec(params.logits);
  std::vector<ComponentWork> out(L);
  for (int i = 0; i < L; ++i) {
    out[i].a_mu = A * params.means[i];
    out[i].ab = A * params.factors[i];
    Eigen::MatrixXd S = out[i].ab * out[i].ab.transpose() + noise_cov;
    Eigen::LLT<Eigen::MatrixXd> llt(psd_jitter(S));
    if (llt.info() != Eigen::Success) throw std::runtime_error("train: observation covariance not positive definite");
    double logdet = 0.0;
    for (int k = 0; k < m; ++k) logdet += 2.0 * std::log(llt.matrixL()(k, k));
    out[i].log_const = std::log(std::max(w[i], 1e-300)) - 0.5 * (m * std::log(2.0 * M_PI) + logdet);
    out[i].precision = llt.solve(Eigen::MatrixXd::Identity(m, m));
  }
  return out;
}

BatchForward forward_batch(const TrainableParams& params, const std::vector<ComponentWork>& comps,
                           const Eigen::MatrixXd& Xb, const Eigen::MatrixXd& Yb) {
  const int L = params.components();
  const int b = static_cast<int>(Yb.cols());
  BatchForward fwd;
  fwd.U.resize(L);
  fwd.T.resize(L);
  Eigen::MatrixXd Z(L, b);
  for (int i = 0; i < L; ++i) {
    const Eigen::MatrixXd res = Yb.colwise() - comps[i].a_mu;
    fwd.U[i] = comps[i].precision * res;
    Z.row(i) = (-0.5 * (res.array() * fwd.U[i].array()).colwise().sum()).matrix();
    Z.row(i).array() += comps[i].log_const;
    fwd.T[i] = (params.factors[i] * (comps[i].ab.transpose() * fwd.U[i])).colwise() + params.means[i];
  }
  const Eigen::RowVectorXd zmax = Z.colwise().maxCoeff();
  fwd.W = (Z.rowwise() - zmax).array().exp();
  fwd.W.array().rowwise() /= fwd.W.array().colwise().sum();

  fwd.E = -Xb;
  for (int i = 0; i < L; ++i) fwd.E += fwd.T[i] * fwd.W.row(i).asDiagonal();
  fwd.risk = fwd.E.squaredNorm() / b;
  return fwd;
}

void accumulate_regularizer_grad(const TrainableParams& params, Regularizer reg, double weight, ParamGrad* grad) {
  if (reg == Regularizer::none || weight == 0.0) return;
  for (int i = 0; i < params.components(); ++i) {
    const Eigen::MatrixXd& B = params.factors[i];
    if (reg == Regularizer::frobenius) {
      grad->factors[i] += weight * 4.0 * (B * (B.transpose() * B));
    } else {
      grad->factors[i] += weight * 2.0 * B;
    }
  }
}

struct AdamState {
  ParamGrad m1, m2;
  long steps = 0;
};

ParamGrad zero_like(const TrainableParams& p) {
  ParamGrad g;
  g.logits = Eigen::VectorXd::Zero(p.logits.size());
  g.means.reserve(p.means.size());
  g.factors.reserve(p.factors.size());
  for (const auto& mu : p.means) g.means.push_back(Eigen::VectorXd::Zero(mu.size()));
  for (const auto& B : p.factors) g.factors.push_back(Eigen::MatrixXd::Zero(B.rows(), B.cols()));
  return g;
}

template <typename Param, typename Grad>
void adam_update_tensor(Param& p, const Grad& g, Grad& m1, Grad& m2, const TrainConfig& cfg, double bc1, double bc2) {
  m1 = cfg.beta1 * m1 + (1.0 - cfg.beta1) * g;
  m2 = (cfg.beta2 * m2.array() + (1.0 - cfg.beta2) * g.array().square()).matrix();
  p.array() -= cfg.learning_rate * (m1.array() / bc1) / ((m2.array() / bc2).sqrt() + cfg.adam_eps);
}

void apply_step(TrainableParams& params, const ParamGrad& grad, const TrainConfig& cfg, AdamState* adam) {
  if (cfg.optimizer == Optimizer::sgd) {
    params.logits -= cfg.learning_rate * grad.logits;
    for (size_t i = 0; i < params.means.size(); ++i) params.means[i] -= cfg.learning_rate * grad.means[i];
    for (size_t i = 0; i < params.factors.size(); ++i) params.factors[i] -= cfg.learning_rate * grad.factors[i];
  } else {
    adam->steps += 1;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(adam->steps));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(adam->steps));
    adam_update_tensor(params.logits, grad.logits, adam->m1.logits, adam->m2.logits, cfg, bc1, bc2);
    for (size_t i = 0; i < params.means.size(); ++i)
      adam_update_tensor(params.means[i], grad.means[i], adam->m1.means[i], adam->m2.means[i], cfg, bc1, bc2);
    for (size_t i = 0; i < params.factors.size(); ++i)
      adam_update_tensor(params.factors[i], grad.factors[i], adam->m1.factors[i], adam->m2.factors[i], cfg, bc1, bc2);
  }
  if (std::isfinite(cfg.sup_norm_bound)) {
    const double r = cfg.sup_norm_bound;
    params.logits = params.logits.cwiseMax(-r).cwiseMin(r);
    for (auto& mu : params.means) mu = mu.cwiseMax(-r).cwiseMin(r);
    for (auto& B : params.factors) B = B.cwiseMax(-r).cwiseMin(r);
  }
}

}  // namespace

TrainableParams TrainableParams::from_model(const MixtureModel& model, int rank) {
  model.validate();
  if (rank <= 0) throw std::invalid_argument("from_model: rank must be positive");
  const int L = model.components();
  const int n = model.dim();
  TrainableParams p;
  p.logits.resize(L);
  p.means = model.means;
  p.factors.reserve(L);
  for (int i = 0; i < L; ++i) {
    p.logits[i] = std::log(std::max(model.weights[i], 1e-300));
    Eigen::MatrixXd F;
    if (model.has_factors() && model.factors[i].cols() <= rank) {
      F = model.factors[i];
    } else {
      F = covariance_factor(model.covariances[i]);
      if (F.cols() > rank) F = F.leftCols(rank).eval();
    }
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(n, rank);
    B.leftCols(F.cols()) = F;
    if (F.cols() < rank) {
      double eps = 1e-3 * std::sqrt(std::max(model.covariances[i].trace(), 0.0) / n);
      if (eps <= 0.0) eps = 1e-3;
      for (int j = static_cast<int>(F.cols()); j < rank; ++j) B(j % n, j) = eps;
    }
    p.factors.push_back(std::move(B));
  }
  return p;
}

MixtureModel TrainableParams::to_model() const {
  check_shapes(*this);
  MixtureModel model;
  model.weights = softmax_vec(logits);
  model.means = means;
  model.factors = factors;
  model.covariances.reserve(factors.size());
  for (const auto& B : factors) model.covariances.push_back(B * B.transpose());
  model.validate();
  return model;
}

double empirical_risk(const TrainableParams& params, const ForwardOperator& op, const NoiseModel& noise,
                      const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y) {
  if (X.rows() != Y.rows()) throw std::invalid_argument("empirical_risk: X and Y sample counts differ");
  if (X.rows() == 0) throw std::invalid_argument("empirical_risk: empty sample set");
  PreparedEstimator est = prepare(params.to_model(), op, noise);
  const Eigen::MatrixXd Xhat = est.estimate_batch(Y);
  return (Xhat - X).squaredNorm() / static_cast<double>(X.rows());
}

double regularizer_value(const TrainableParams& params, Regularizer reg) {
  if (reg == Regularizer::none) return 0.0;
  double total = 0.0;
  for (const auto& B : params.factors) {
    const Eigen::MatrixXd sigma = B * B.transpose();
    if (reg == Regularizer::frobenius) {
      total += sigma.squaredNorm();
    } else {
      // PSD, so the nuclear norm is the sum of (nonnegative) eigenvalues.
      total += symmetric_eig(sigma).eigenvalues.cwiseMax(0.0).sum();
    }
  }
  return total;
}

ParamGrad gradient(const TrainableParams& params, const ForwardOperator& op, const NoiseModel& noise,
                   const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y, Regularizer reg, double reg_weight) {
  check_shapes(params);
  if (X.rows() != Y.rows() || X.rows() == 0) throw std::invalid_argument("gradient: bad sample set");
  const int L = params.components();
  const int b = static_cast<int>(X.rows());
  const Eigen::MatrixXd A = op.materialize();
  const Eigen::MatrixXd Xb = X.transpose();
  const Eigen::MatrixXd Yb = Y.transpose();

  const std::vector<ComponentWork> comps = component_work(params, A, noise.covariance());
  const BatchForward fwd = forward_batch(params, comps, Xb, Yb);

  // dz gradient: g(i,s) = 2 t_i.e, a(i,s) = W(i,s)(g(i,s) - sum_k W(k,s) g(k,s)).
  Eigen::MatrixXd G(L, b);
  for (int i = 0; i < L; ++i) G.row(i) = 2.0 * (fwd.T[i].array() * fwd.E.array()).colwise().sum().matrix();
  const Eigen::RowVectorXd gbar = (fwd.W.array() * G.array()).colwise().sum();
  const Eigen::MatrixXd Acoef = fwd.W.array() * (G.rowwise() - gbar).array();

  ParamGrad grad = zero_like(params);
  const Eigen::VectorXd arow = Acoef.rowwise().sum();
  grad.logits = (arow - softmax_vec(params.logits) * arow.sum()) / b;

  for (int i = 0; i < L; ++i) {
    const Eigen::MatrixXd& U = fwd.U[i];
    const Eigen::MatrixXd V = 2.0 * fwd.E * fwd.W.row(i).asDiagonal();
    const Eigen::VectorXd a = Acoef.row(i).transpose();
    const double asum = a.sum();

    const Eigen::MatrixXd H = comps[i].precision * (comps[i].ab * (params.factors[i].transpose() * V));
    const Eigen::VectorXd vsum = V.rowwise().sum();
    grad.means[i] = (vsum + A.transpose() * (U * a - H.rowwise().sum())) / b;

    // (G_sigma + G_sigma^T) B without forming any n x n intermediate.
    const Eigen::MatrixXd tsym =
        U * a.asDiagonal() * U.transpose() - H * U.transpose() - U * H.transpose() - asum * comps[i].precision;
    const Eigen::MatrixXd inner = tsym * comps[i].ab + U * (V.transpose() * params.factors[i]);
    grad.factors[i] = (A.transpose() * inner + V * (U.transpose() * comps[i].ab)) / b;
  }

  accumulate_regularizer_grad(params, reg, reg_weight, &grad);
  return grad;
}

TrainResult train(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y, const ForwardOperator& op,
                  const NoiseModel& noise, const TrainableParams& init, const TrainConfig& config) {
  check_shapes(init);
  if (X.rows() != Y.rows() || X.rows() == 0) throw std::invalid_argument("train: bad sample set");
  if (config.batch_size <= 0) throw std::invalid_argument("train: batch_size must be positive");
  if (config.epochs < 0) throw std::invalid_argument("train: epochs must be nonnegative");

  TrainResult result;
  result.params = init;
  AdamState adam;
  adam.m1 = zero_like(init);
  adam.m2 = zero_like(init);

  auto record = [&](int epoch) {
    EpochStats row;
    row.epoch = epoch;
    row.risk = empirical_risk(result.params, op, noise, X, Y);
    row.reg = regularizer_value(result.params, config.regularizer);
    if (!std::isfinite(row.risk) || !std::isfinite(row.reg))
      throw std::runtime_error("train: non-finite objective at epoch " + std::to_string(epoch));
    result.history.push_back(row);
  };
  record(0);

  const int N = static_cast<int>(X.rows());
  std::vector<int> order(N);
  Rng shuffle_rng(config.seed, 1);
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    for (int j = 0; j < N; ++j) order[j] = j;
    Rng epoch_rng = shuffle_rng.derive(static_cast<std::uint64_t>(epoch));
    epoch_rng.shuffle(order);
    for (int start = 0; start < N; start += config.batch_size) {
      const int count = std::min(config.batch_size, N - start);
      Eigen::MatrixXd Xb(count, X.cols());
      Eigen::MatrixXd Yb(count, Y.cols());
      for (int j = 0; j < count; ++j) {
        Xb.row(j) = X.row(order[start + j]);
        Yb.row(j) = Y.row(order[start + j]);
      }
      const ParamGrad g = gradient(result.params, op, noise, Xb, Yb, config.regularizer, config.reg_weight);
      apply_step(result.params, g, config, &adam);
    }
    record(epoch);
  }

  result.model = result.params.to_model();
  return result;
}

void write_loss_history_csv(const std::string& path, const std::vector<EpochStats>& history) {
  std::vector<std::vector<std::string>> rows;
  rows.reserve(history.size());
  for (const auto& row : history)
    rows.push_back({std::to_string(row.epoch), format_double(row.risk), format_double(row.reg)});
  write_table_csv(path, {"epoch", "train_risk", "reg_term"}, rows);
}

}  // namespace gmbayes
