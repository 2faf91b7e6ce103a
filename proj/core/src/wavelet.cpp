#include "gmbayes/wavelet.hpp"

#include <stdexcept>

namespace gmbayes {

const std::array<double, 12> kDb6Lowpass = {
    0.11154074335008017,    0.4946238903983854,   0.7511339080215775,   0.3152503517092432,
    -0.22626469396516913,   -0.12976686756709563, 0.09750160558707936,  0.02752286553001629,
    -0.031582039318031156,  0.0005538422009938016, 0.004777257511010651, -0.00107730108499558};

namespace {

constexpr int kTaps = 12;

double highpass(int k) { return (k % 2 == 0 ? 1.0 : -1.0) * kDb6Lowpass[kTaps - 1 - k]; }

void check_length(int n, int levels) {
  if (levels < 1) throw std::invalid_argument("wavelet: levels must be positive");
  if (n < (1 << levels) || n % (1 << levels) != 0)
    throw std::invalid_argument("wavelet: length must be a positive multiple of 2^levels");
}

// One periodic analysis step: x (length N, even) -> [approx | detail].
void analysis_step(const double* x, int N, double* approx, double* detail) {
  for (int i = 0; i < N / 2; ++i) {
    double a = 0.0;
    double d = 0.0;
    for (int k = 0; k < kTaps; ++k) {
      const double v = x[(2 * i + k) % N];
      a += kDb6Lowpass[k] * v;
      d += highpass(k) * v;
    }
    approx[i] = a;
    detail[i] = d;
  }
}

// Adjoint of the analysis step (the filter bank is orthogonal).
void synthesis_step(const double* approx, const double* detail, int N, double* x) {
  for (int j = 0; j < N; ++j) x[j] = 0.0;
  for (int i = 0; i < N / 2; ++i) {
    for (int k = 0; k < kTaps; ++k) {
      x[(2 * i + k) % N] += kDb6Lowpass[k] * approx[i] + highpass(k) * detail[i];
    }
  }
}

}  // namespace

Eigen::VectorXd dwt(const Eigen::VectorXd& x, const WaveletBasis& basis) {
  const int n = static_cast<int>(x.size());
  check_length(n, basis.levels);
  Eigen::VectorXd out(n);
  Eigen::VectorXd work = x;
  int N = n;
  for (int lev = 0; lev < basis.levels; ++lev) {
    Eigen::VectorXd approx(N / 2), detail(N / 2);
    analysis_step(work.data(), N, approx.data(), detail.data());
    out.segment(N / 2, N / 2) = detail;
    work = approx;
    N /= 2;
  }
  out.head(N) = work;
  return out;
}

Eigen::VectorXd idwt(const Eigen::VectorXd& coeffs, const WaveletBasis& basis) {
  const int n = static_cast<int>(coeffs.size());
  check_length(n, basis.levels);
  int N = n >> basis.levels;
  Eigen::VectorXd work = coeffs.head(N);
  for (int lev = basis.levels - 1; lev >= 0; --lev) {
    Eigen::VectorXd merged(2 * N);
    synthesis_step(work.data(), coeffs.segment(N, N).data(), 2 * N, merged.data());
    work = std::move(merged);
    N *= 2;
  }
  return work;
}

Eigen::MatrixXd wavelet_synthesis_matrix(int n, const WaveletBasis& basis) {
  check_length(n, basis.levels);
  Eigen::MatrixXd W(n, n);
  Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
  for (int j = 0; j < n; ++j) {
    e[j] = 1.0;
    W.col(j) = idwt(e, basis);
    e[j] = 0.0;
  }
  return W;
}

BasisSplit known_basis_split(int n, const WaveletBasis& basis, int coarse_levels) {
  check_length(n, basis.levels);
  if (coarse_levels < 0 || coarse_levels > basis.levels)
    throw std::invalid_argument("known_basis_split: coarse_levels out of range");
  BasisSplit split;
  const int fixed_count = coarse_levels == 0 ? 0 : n >> coarse_levels;
  split.fixed.reserve(fixed_count);
  split.sparse.reserve(n - fixed_count);
  for (int j = 0; j < n; ++j) {
    if (j < fixed_count)
      split.fixed.push_back(j);
    else
      split.sparse.push_back(j);
  }
  return split;
}

}  // namespace gmbayes
