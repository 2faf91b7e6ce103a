#include "gmbayes/dictionary.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "gmbayes/linalg.hpp"
#include "gmbayes/prox.hpp"
#include "gmbayes/rng.hpp"

namespace gmbayes {

void Dictionary::validate() const {
  if (atoms.size() == 0) throw std::invalid_argument("Dictionary: empty");
  for (int j = 0; j < atoms.cols(); ++j)
    if (std::abs(atoms.col(j).norm() - 1.0) > 1e-8)
      throw std::invalid_argument("Dictionary: atom " + std::to_string(j) + " is not unit norm");
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(atoms);
  if (qr.rank() < atoms.cols()) throw std::invalid_argument("Dictionary: atoms are not linearly independent");
}

Eigen::VectorXd sparse_code(const Dictionary& dict, const Eigen::VectorXd& z, double lambda,
                            const SparseCodeOptions& opts) {
  const Eigen::MatrixXd& D = dict.atoms;
  if (z.size() != D.rows()) throw std::invalid_argument("sparse_code: dimension mismatch");
  if (lambda < 0.0) throw std::invalid_argument("sparse_code: lambda must be nonnegative");

  if (lambda == 0.0) return D.colPivHouseholderQr().solve(z);

  const int d = static_cast<int>(D.cols());
  const Eigen::VectorXd col_sq = D.colwise().squaredNorm();
  const double tol = opts.kkt_tol * std::max(1.0, (D.transpose() * z).cwiseAbs().maxCoeff());

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(d);
  Eigen::VectorXd r = z;
  for (int pass = 0; pass < opts.max_passes; ++pass) {
    for (int j = 0; j < d; ++j) {
      const double c = D.col(j).dot(r) + col_sq[j] * beta[j];
      const double next = soft_threshold(c, lambda) / col_sq[j];
      if (next != beta[j]) {
        r += (beta[j] - next) * D.col(j);
        beta[j] = next;
      }
    }
    // KKT subgradient residual of 1/2||z - D beta||^2 + lambda ||beta||_1.
    const Eigen::VectorXd g = -(D.transpose() * r);
    double viol = 0.0;
    for (int j = 0; j < d; ++j) {
      if (beta[j] == 0.0)
        viol = std::max(viol, std::max(0.0, std::abs(g[j]) - lambda));
      else
        viol = std::max(viol, std::abs(g[j] + lambda * (beta[j] > 0.0 ? 1.0 : -1.0)));
    }
    if (viol <= tol) return beta;
  }
  throw std::runtime_error("sparse_code: pass budget exhausted before KKT residual converged");
}

DictLearnResult dict_learn(const Eigen::MatrixXd& X, int num_atoms, double lambda, const DictLearnOptions& opts) {
  const int N = static_cast<int>(X.rows());
  const int n = static_cast<int>(X.cols());
  if (num_atoms <= 0 || num_atoms > n) throw std::invalid_argument("dict_learn: num_atoms must be in [1, dim]");
  if (N < num_atoms) throw std::invalid_argument("dict_learn: fewer samples than atoms");

  const Eigen::MatrixXd Xt = X.transpose();
  Rng rng(opts.seed, 10);
  std::vector<int> order(N);
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);

  DictLearnResult res;
  res.dict.atoms.resize(n, num_atoms);
  for (int j = 0; j < num_atoms; ++j) {
    Eigen::VectorXd v = Xt.col(order[j]);
    if (v.norm() <= 1e-12) {
      for (int i = 0; i < n; ++i) v[i] = rng.normal();
    }
    res.dict.atoms.col(j) = v / v.norm();
  }

  Eigen::MatrixXd codes(num_atoms, N);
  for (int epoch = 0; epoch < opts.epochs; ++epoch) {
    for (int s = 0; s < N; ++s) codes.col(s) = sparse_code(res.dict, Xt.col(s), lambda, opts.code);

    const Eigen::MatrixXd Astat = codes * codes.transpose();
    const Eigen::MatrixXd Bstat = Xt * codes.transpose();
    Eigen::MatrixXd& D = res.dict.atoms;
    for (int j = 0; j < num_atoms; ++j) {
      if (Astat(j, j) <= 1e-10) {
        // Unused atom: replace with the worst-reconstructed sample.
        const Eigen::RowVectorXd errs = (Xt - D * codes).colwise().squaredNorm();
        int worst = 0;
        errs.maxCoeff(&worst);
        Eigen::VectorXd v = Xt.col(worst);
        if (v.norm() <= 1e-12) {
          for (int i = 0; i < n; ++i) v[i] = rng.normal();
        }
        D.col(j) = v / v.norm();
        res.replaced_atoms += 1;
        continue;
      }
      const Eigen::VectorXd u = Bstat.col(j) - D * Astat.col(j) + D.col(j) * Astat(j, j);
      if (u.norm() > 1e-12) D.col(j) = u / u.norm();
    }

    const double fit = 0.5 * (Xt - D * codes).squaredNorm();
    res.objective.push_back((fit + lambda * codes.cwiseAbs().sum()) / N);
  }
  return res;
}

namespace {

double resolve_prox_step(double requested, const Eigen::MatrixXd& A) {
  const double norm = spectral_norm_estimate(A);
  if (requested <= 0.0) return norm > 0.0 ? 0.99 / (norm * norm) : 1.0;
  if (norm > 0.0 && requested > (1.0 + 1e-9) / (norm * norm))
    throw std::invalid_argument("dl_reconstruct: step exceeds stability bound");
  return requested;
}

}  // namespace

DlResult dl_reconstruct(const Eigen::VectorXd& y, const Eigen::MatrixXd& A, const Dictionary& dict,
                        const DlOptions& opts) {
  if (A.rows() != y.size() || A.cols() != dict.dim()) throw std::invalid_argument("dl_reconstruct: shape mismatch");
  const double t = resolve_prox_step(opts.step, A);

  DlResult res;
  res.x = Eigen::VectorXd::Zero(A.cols());
  for (int iter = 0; iter < opts.max_iters; ++iter) {
    const Eigen::VectorXd z = res.x - t * (A.transpose() * (A * res.x - y));
    const Eigen::VectorXd next = dict.atoms * sparse_code(dict, z, opts.lambda * t, opts.code);
    const double delta = (next - res.x).norm() / (1.0 + res.x.norm());
    res.x = next;
    res.stats.iterations = iter + 1;
    res.stats.final_delta = delta;
    if (delta <= opts.tol) {
      res.stats.converged = true;
      break;
    }
  }
  res.stats.objective = 0.5 * (A * res.x - y).squaredNorm();
  return res;
}

GroupDlResult group_dl_reconstruct(const Eigen::VectorXd& y, const Eigen::MatrixXd& A,
                                   const std::vector<Dictionary>& dicts, const DlOptions& opts) {
  if (dicts.empty()) throw std::invalid_argument("group_dl_reconstruct: no dictionaries");
  for (const auto& d : dicts)
    if (d.dim() != A.cols()) throw std::invalid_argument("group_dl_reconstruct: dictionary dimension mismatch");
  const double t = resolve_prox_step(opts.step, A);

  GroupDlResult res;
  res.x = Eigen::VectorXd::Zero(A.cols());
  for (int iter = 0; iter < opts.max_iters; ++iter) {
    const Eigen::VectorXd z = res.x - t * (A.transpose() * (A * res.x - y));
    Eigen::VectorXd best;
    double best_value = std::numeric_limits<double>::infinity();
    int best_idx = -1;
    for (size_t i = 0; i < dicts.size(); ++i) {
      const Eigen::VectorXd code = sparse_code(dicts[i], z, opts.lambda * t, opts.code);
      const Eigen::VectorXd p = dicts[i].atoms * code;
      const double value = 0.5 * (z - p).squaredNorm() + opts.lambda * t * code.cwiseAbs().sum();
      if (value < best_value) {
        best_value = value;
        best = p;
        best_idx = static_cast<int>(i);
      }
    }
    const double delta = (best - res.x).norm() / (1.0 + res.x.norm());
    res.x = best;
    res.selected = best_idx;
    res.stats.iterations = iter + 1;
    res.stats.final_delta = delta;
    if (delta <= opts.tol) {
      res.stats.converged = true;
      break;
    }
  }
  res.stats.objective = 0.5 * (A * res.x - y).squaredNorm();
  return res;
}

}  // namespace gmbayes
