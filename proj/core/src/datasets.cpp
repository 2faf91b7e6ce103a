#include "gmbayes/datasets.hpp"

#include <cmath>
#include <stdexcept>

#include "gmbayes/rng.hpp"

namespace gmbayes {

namespace {

constexpr std::uint64_t kStreamSupports = 1;
constexpr std::uint64_t kStreamTrain = 2;
constexpr std::uint64_t kStreamTest = 3;

// s distinct indices in [0, n), sorted; partial Fisher-Yates.
std::vector<int> draw_support(int n, int s, Rng rng) {
  std::vector<int> pool(n);
  for (int j = 0; j < n; ++j) pool[j] = j;
  std::vector<int> out(s);
  for (int j = 0; j < s; ++j) {
    const int pick = j + static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(n - j)));
    std::swap(pool[j], pool[pick]);
    out[j] = pool[j];
  }
  std::sort(out.begin(), out.end());
  return out;
}

Dataset gen_dataset1(const DatasetSpec& spec) {
  if (spec.sparsity <= 0 || spec.sparsity > spec.n) throw std::invalid_argument("dataset 1: bad sparsity");
  if (spec.components <= 0) throw std::invalid_argument("dataset 1: bad component count");

  Rng support_rng(spec.seed, kStreamSupports);
  std::vector<std::vector<int>> supports;
  supports.reserve(spec.components);
  for (int i = 0; i < spec.components; ++i)
    supports.push_back(draw_support(spec.n, spec.sparsity, support_rng.derive(static_cast<std::uint64_t>(i))));

  Dataset data;
  data.spec = spec;
  data.true_model = mixture_from_coordinate_supports(spec.n, supports);
  data.has_true_model = true;
  data.num_classes = spec.components;

  SampleSet train = sample_mixture(data.true_model, Rng(spec.seed, kStreamTrain), spec.train_count);
  SampleSet test = sample_mixture(data.true_model, Rng(spec.seed, kStreamTest), spec.test_count);
  data.train = std::move(train.signals);
  data.train_labels = std::move(train.labels);
  data.test = std::move(test.signals);
  data.test_labels = std::move(test.labels);
  return data;
}

// Grid of n equispaced points covering [0, 4 pi] including both endpoints.
Eigen::VectorXd tau_grid(int n) {
  Eigen::VectorXd tau(n);
  for (int j = 0; j < n; ++j) tau[j] = 4.0 * M_PI * j / (n - 1);
  return tau;
}

// Ten interior equispaced jump locations 4 pi k / 11, k = 1..10.
double jump_location(int k) { return 4.0 * M_PI * (k + 1) / 11.0; }

void gen_dataset2_block(const DatasetSpec& spec, const Rng& rng, int count, Eigen::MatrixXd* X,
                        std::vector<int>* labels) {
  const Eigen::VectorXd tau = tau_grid(spec.n);
  X->resize(count, spec.n);
  labels->resize(count);
  for (int j = 0; j < count; ++j) {
    Rng r = rng.derive(static_cast<std::uint64_t>(j));
    const int label = static_cast<int>(r.uniform_below(10));
    const double amp = r.uniform(0.05, 0.1);
    const double omega = r.uniform(1.0, 2.0);
    const double offset = r.uniform(0.5, 3.0);
    const double jump = r.normal(0.0, 0.2);
    const double tj = jump_location(label);
    for (int k = 0; k < spec.n; ++k)
      (*X)(j, k) = amp * std::sin(omega * tau[k]) + offset + (tau[k] > tj ? jump : 0.0);
    (*labels)[j] = label;
  }
}

void gen_dataset3_block(const DatasetSpec& spec, const Rng& rng, int count, Eigen::MatrixXd* X,
                        std::vector<int>* labels) {
  const Eigen::VectorXd tau = tau_grid(spec.n);
  X->resize(count, spec.n);
  labels->resize(count);
  for (int j = 0; j < count; ++j) {
    Rng r = rng.derive(static_cast<std::uint64_t>(j));
    const int label = static_cast<int>(r.uniform_below(55));
    double a[4], b[4];
    for (int d = 0; d < 4; ++d) {
      a[d] = r.normal(0.1, 0.1);
      b[d] = r.normal(0.1, 0.1);
    }
    const double c1 = r.normal(0.0, 0.2);
    const double c2 = r.normal(0.0, 0.2);
    const auto [first, second] = dataset3_jump_pair(label);
    const double t1 = jump_location(first);
    const double t2 = jump_location(second);
    for (int k = 0; k < spec.n; ++k) {
      double v = 0.0;
      for (int d = 0; d < 4; ++d)
        v += a[d] * std::cos(2.0 * M_PI * (d + 1) * tau[k]) + b[d] * std::sin(2.0 * M_PI * (d + 1) * tau[k]);
      if (tau[k] > t2)
        v += c2;
      else if (tau[k] > t1)
        v += c1;
      (*X)(j, k) = v;
    }
    (*labels)[j] = label;
  }
}

}  // namespace

std::pair<int, int> dataset3_jump_pair(int label) {
  if (label < 0 || label >= 55) throw std::invalid_argument("dataset3_jump_pair: label out of range");
  int idx = 0;
  for (int i = 0; i < 10; ++i)
    for (int j = i; j < 10; ++j) {
      if (idx == label) return {i, j};
      ++idx;
    }
  throw std::logic_error("dataset3_jump_pair: unreachable");
}

Dataset generate_dataset(const DatasetSpec& spec) {
  if (spec.n < 2) throw std::invalid_argument("generate_dataset: n too small");
  if (spec.train_count <= 0 || spec.test_count <= 0) throw std::invalid_argument("generate_dataset: bad counts");

  if (spec.id == 1) return gen_dataset1(spec);

  Dataset data;
  data.spec = spec;
  if (spec.id == 2) {
    data.num_classes = 10;
    gen_dataset2_block(spec, Rng(spec.seed, kStreamTrain), spec.train_count, &data.train, &data.train_labels);
    gen_dataset2_block(spec, Rng(spec.seed, kStreamTest), spec.test_count, &data.test, &data.test_labels);
  } else if (spec.id == 3) {
    data.num_classes = 55;
    gen_dataset3_block(spec, Rng(spec.seed, kStreamTrain), spec.train_count, &data.train, &data.train_labels);
    gen_dataset3_block(spec, Rng(spec.seed, kStreamTest), spec.test_count, &data.test, &data.test_labels);
  } else {
    throw std::invalid_argument("generate_dataset: unknown dataset id " + std::to_string(spec.id));
  }
  return data;
}

}  // namespace gmbayes
