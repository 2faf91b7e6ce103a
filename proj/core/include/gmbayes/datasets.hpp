#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "gmbayes/mixture.hpp"

namespace gmbayes {

struct DatasetSpec {
  int id = 1;  // 1 sparse GMM, 2 sinusoid with one jump, 3 Fourier with two jumps
  int n = 1000;
  int sparsity = 20;    // dataset 1
  int components = 10;  // dataset 1; datasets 2 and 3 fix their own class counts
  int train_count = 2000;
  int test_count = 2000;
  std::uint64_t seed = 0;
};

struct Dataset {
  DatasetSpec spec;
  Eigen::MatrixXd train, test;  // one signal per row
  std::vector<int> train_labels, test_labels;
  int num_classes = 0;
  MixtureModel true_model;  // dataset 1 only
  bool has_true_model = false;
};

/// Deterministic in the spec seed; per-signal derived streams, so any prefix
/// of the train or test set is independent of the requested counts.
Dataset generate_dataset(const DatasetSpec& spec);

/// Dataset 3 label -> (first, second) jump index pair, 0 <= i <= j < 10,
/// enumerated in lexicographic order.
std::pair<int, int> dataset3_jump_pair(int label);

}  // namespace gmbayes
