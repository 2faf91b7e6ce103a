#include "gmbayes/basis_inference.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "gmbayes/linalg.hpp"

namespace gmbayes {

namespace {

Eigen::MatrixXd empirical_covariance(const Eigen::MatrixXd& rows) {
  const Eigen::RowVectorXd mean = rows.colwise().mean();
  const Eigen::MatrixXd centered = rows.rowwise() - mean;
  return centered.transpose() * centered / static_cast<double>(rows.rows());
}

}  // namespace

Eigen::MatrixXd svd_basis(const Eigen::MatrixXd& X) {
  if (X.rows() < 2) throw std::invalid_argument("svd_basis: need at least two samples");
  return symmetric_eig(empirical_covariance(X)).eigenvectors;
}

std::vector<Eigen::MatrixXd> GroupBasisSet::frames(int s) const {
  if (s <= 0) throw std::invalid_argument("GroupBasisSet: frame size must be positive");
  std::vector<Eigen::MatrixXd> out;
  out.reserve(bases.size());
  for (const auto& V : bases) out.push_back(V.leftCols(std::min<int>(s, static_cast<int>(V.cols()))));
  return out;
}

GroupBasisSet group_svd_bases(const Eigen::MatrixXd& X, const std::vector<int>& labels, double eps_rel) {
  const int N = static_cast<int>(X.rows());
  const int n = static_cast<int>(X.cols());
  if (static_cast<int>(labels.size()) != N || N == 0) throw std::invalid_argument("group_svd_bases: bad labels");

  std::vector<int> ids;
  for (int lab : labels) {
    if (lab < 0) throw std::invalid_argument("group_svd_bases: negative label");
    if (std::find(ids.begin(), ids.end(), lab) == ids.end()) ids.push_back(lab);
  }
  std::sort(ids.begin(), ids.end());

  GroupBasisSet out;
  for (int id : ids) {
    int count = 0;
    for (int lab : labels) count += lab == id;
    if (count < 2) {
      out.fallback = true;
      break;
    }
  }

  std::vector<Eigen::MatrixXd> covs;
  if (out.fallback) {
    // Not enough samples somewhere: every group gets the global covariance.
    covs.assign(ids.size(), empirical_covariance(X));
  } else {
    for (int id : ids) {
      Eigen::MatrixXd rows(std::count(labels.begin(), labels.end(), id), n);
      int r = 0;
      for (int j = 0; j < N; ++j)
        if (labels[j] == id) rows.row(r++) = X.row(j);
      covs.push_back(empirical_covariance(rows));
    }
  }

  for (const auto& cov : covs) {
    const SymmetricEig eig = symmetric_eig(cov);
    out.bases.push_back(eig.eigenvectors);
    out.eigenvalues.push_back(eig.eigenvalues);
    const double eps = eps_rel * std::max(cov.trace() / n, 1e-300);
    const Eigen::VectorXd inv_sqrt = (eig.eigenvalues.cwiseMax(0.0).array() + eps).rsqrt();
    out.penalties.push_back(eig.eigenvectors * inv_sqrt.asDiagonal() * eig.eigenvectors.transpose());
  }
  return out;
}

}  // namespace gmbayes
