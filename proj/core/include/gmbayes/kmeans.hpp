#pragma once

#include <Eigen/Dense>
#include <vector>

#include "gmbayes/rng.hpp"

namespace gmbayes {

struct KMeansResult {
  std::vector<int> labels;
  Eigen::MatrixXd centers;  // k x d
  double inertia = 0.0;
  int iterations = 0;
};

/// Lloyd iterations with k-means++ seeding, best of `restarts` runs by
/// inertia (ties keep the earlier restart).  Rows of X are points.  Empty
/// clusters are reseeded to the point farthest from its assigned center.
KMeansResult kmeans(const Eigen::MatrixXd& X, int k, const Rng& rng, int restarts = 10, int max_iters = 100);

}  // namespace gmbayes
