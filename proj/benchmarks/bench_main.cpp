#include <benchmark/benchmark.h>

#include <Eigen/Dense>

#include "gmbayes/estimator.hpp"
#include "gmbayes/forward_operator.hpp"
#include "gmbayes/lasso.hpp"
#include "gmbayes/mixture.hpp"
#include "gmbayes/noise.hpp"
#include "gmbayes/rng.hpp"
#include "gmbayes/wavelet.hpp"

namespace {

using namespace gmbayes;

Eigen::MatrixXd random_matrix(Rng& rng, int rows, int cols) {
  Eigen::MatrixXd m(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) m(i, j) = rng.normal();
  return m;
}

MixtureModel random_mixture(int n, int L, int rank, std::uint64_t seed) {
  Rng rng(seed, 99);
  MixtureModel model;
  model.weights = Eigen::VectorXd::Constant(L, 1.0 / L);
  for (int i = 0; i < L; ++i) {
    Eigen::VectorXd mu(n);
    for (int k = 0; k < n; ++k) mu[k] = rng.normal();
    Eigen::MatrixXd B = random_matrix(rng, n, rank) / std::sqrt(static_cast<double>(rank));
    model.means.push_back(mu);
    model.factors.push_back(B);
    model.covariances.push_back(B * B.transpose());
  }
  model.validate();
  return model;
}

struct EstimatorFixture {
  static constexpr int n = 50;
  static constexpr int L = 5;
  PreparedEstimator est;
  Eigen::MatrixXd Y;

  EstimatorFixture()
      : est(prepare(random_mixture(n, L, 10, 7), ForwardOperator::identity(n), NoiseModel::isotropic(n, 0.1))) {
    Rng rng(7, 4);
    Y = random_matrix(rng, 64, n);
  }
};

const EstimatorFixture& estimator_fixture() {
  static const EstimatorFixture fx;
  return fx;
}

void BM_EstimateSingle(benchmark::State& state) {
  const auto& fx = estimator_fixture();
  const Eigen::VectorXd y = fx.Y.row(0).transpose();
  for (auto _ : state) benchmark::DoNotOptimize(fx.est.estimate(y));
}
BENCHMARK(BM_EstimateSingle);

void BM_EstimateAttention(benchmark::State& state) {
  const auto& fx = estimator_fixture();
  const Eigen::VectorXd y = fx.Y.row(0).transpose();
  for (auto _ : state) benchmark::DoNotOptimize(fx.est.estimate_attention(y));
}
BENCHMARK(BM_EstimateAttention);

void BM_EstimateBatch64(benchmark::State& state) {
  const auto& fx = estimator_fixture();
  for (auto _ : state) benchmark::DoNotOptimize(fx.est.estimate_batch(fx.Y));
}
BENCHMARK(BM_EstimateBatch64);

void BM_Prepare(benchmark::State& state) {
  const MixtureModel model = random_mixture(50, 5, 10, 7);
  const ForwardOperator op = ForwardOperator::identity(50);
  const NoiseModel noise = NoiseModel::isotropic(50, 0.1);
  for (auto _ : state) benchmark::DoNotOptimize(prepare(model, op, noise));
}
BENCHMARK(BM_Prepare);

void BM_IstaDenoise(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Rng rng(3, 1);
  const Eigen::MatrixXd A = Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd M = Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) y[i] = rng.normal();
  IstaOptions opts;
  opts.lambda = 0.1;
  opts.step = 1.0;
  for (auto _ : state) benchmark::DoNotOptimize(ista_lasso(y, A, M, opts));
}
BENCHMARK(BM_IstaDenoise)->Arg(64)->Arg(256);

void BM_BlurApply(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const ForwardOperator op = ForwardOperator::gaussian_blur(n, 20.0);
  Rng rng(5, 2);
  Eigen::VectorXd x(n);
  for (int i = 0; i < n; ++i) x[i] = rng.normal();
  for (auto _ : state) benchmark::DoNotOptimize(op.apply(x));
}
BENCHMARK(BM_BlurApply)->Arg(1000);

void BM_Dwt(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Rng rng(11, 0);
  Eigen::VectorXd x(n);
  for (int i = 0; i < n; ++i) x[i] = rng.normal();
  const WaveletBasis basis;
  for (auto _ : state) benchmark::DoNotOptimize(dwt(x, basis));
}
BENCHMARK(BM_Dwt)->Arg(1024);

}  // namespace

BENCHMARK_MAIN();
