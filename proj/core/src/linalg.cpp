#include "gmbayes/linalg.hpp"

#include <cmath>
#include <stdexcept>

namespace gmbayes {

double spectral_norm_estimate(const Eigen::MatrixXd& B, int iters) {
  if (B.size() == 0) return 0.0;
  Eigen::VectorXd v(B.cols());
  // Fixed start: mildly tilted ones so the iteration is reproducible and does
  // not start orthogonal to structured leading directions.
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = 1.0 + 1e-3 * static_cast<double>(i);
  v.normalize();
  double norm_sq = 0.0;
  for (int k = 0; k < iters; ++k) {
    Eigen::VectorXd w = B.transpose() * (B * v);
    const double wn = w.norm();
    if (wn == 0.0) return 0.0;
    norm_sq = v.dot(w);
    v = w / wn;
  }
  return std::sqrt(std::max(norm_sq, 0.0));
}

SymmetricEig symmetric_eig(const Eigen::MatrixXd& M) {
  if (M.rows() != M.cols()) throw std::invalid_argument("symmetric_eig: matrix not square");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(M);
  if (solver.info() != Eigen::Success) throw std::runtime_error("symmetric_eig: eigensolver failed");
  const Eigen::Index n = M.rows();
  SymmetricEig out;
  out.eigenvalues = solver.eigenvalues().reverse();
  out.eigenvectors = solver.eigenvectors().rowwise().reverse();
  for (Eigen::Index j = 0; j < n; ++j) {
    Eigen::Index imax = 0;
    out.eigenvectors.col(j).cwiseAbs().maxCoeff(&imax);
    if (out.eigenvectors(imax, j) < 0) out.eigenvectors.col(j) = -out.eigenvectors.col(j);
  }
  return out;
}

Eigen::MatrixXd sym_inverse_sqrt(const Eigen::MatrixXd& S, double floor_rel) {
  SymmetricEig eig = symmetric_eig(0.5 * (S + S.transpose()));
  const double lambda_max = eig.eigenvalues.size() > 0 ? eig.eigenvalues[0] : 0.0;
  if (lambda_max <= 0.0) throw std::invalid_argument("sym_inverse_sqrt: matrix has no positive eigenvalue");
  const double floor = floor_rel * lambda_max;
  Eigen::VectorXd inv_sqrt = eig.eigenvalues;
  for (Eigen::Index i = 0; i < inv_sqrt.size(); ++i) {
    inv_sqrt[i] = 1.0 / std::sqrt(std::max(eig.eigenvalues[i], floor));
  }
  return eig.eigenvectors * inv_sqrt.asDiagonal() * eig.eigenvectors.transpose();
}

Eigen::MatrixXd psd_jitter(const Eigen::MatrixXd& S, double jitter_rel) {
  Eigen::MatrixXd sym = 0.5 * (S + S.transpose());
  const double delta = jitter_rel * sym.trace() / static_cast<double>(sym.rows());
  sym.diagonal().array() += std::max(delta, 0.0);
  return sym;
}

}  // namespace gmbayes
