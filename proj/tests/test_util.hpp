#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "gmbayes/mixture.hpp"
#include "gmbayes/rng.hpp"

namespace test_util {

inline Eigen::MatrixXd random_matrix(gmbayes::Rng& rng, int rows, int cols) {
  Eigen::MatrixXd m(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) m(i, j) = rng.normal();
  return m;
}

inline Eigen::VectorXd random_vector(gmbayes::Rng& rng, int n) {
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = rng.normal();
  return v;
}

/// Mixture with alternating full-rank and degenerate covariances (factor
/// form B B^T with rank < n on odd components).  Weights are a random point
/// of the simplex interior.
inline gmbayes::MixtureModel random_mixture(int n, int L, std::uint64_t seed) {
  gmbayes::Rng rng(seed, 77);
  gmbayes::MixtureModel model;
  model.weights.resize(L);
  for (int i = 0; i < L; ++i) model.weights[i] = 0.2 + rng.uniform();
  model.weights /= model.weights.sum();
  for (int i = 0; i < L; ++i) {
    model.means.push_back(random_vector(rng, n));
    const int rank = (i % 2 == 0) ? n : 1 + static_cast<int>(rng.uniform_below(std::max(1, n - 1)));
    Eigen::MatrixXd B = random_matrix(rng, n, rank);
    if (rank == n) B += 0.5 * Eigen::MatrixXd::Identity(n, n);
    model.factors.push_back(B);
    model.covariances.push_back(B * B.transpose());
  }
  model.validate();
  return model;
}

/// Scratch directory under the test working directory; removed on scope exit.
struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& name) : path(std::filesystem::current_path() / name) {
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  std::string str() const { return path.string(); }
};

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream buf;
  buf << f.rdbuf();
  return buf.str();
}

}  // namespace test_util
