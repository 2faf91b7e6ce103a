#include "gmbayes/kmeans.hpp"

#include <limits>
#include <stdexcept>

namespace gmbayes {

namespace {

// Squared distances from every row of X to one center.
Eigen::VectorXd sq_dist_to(const Eigen::MatrixXd& X, const Eigen::RowVectorXd& c) {
  return (X.rowwise() - c).rowwise().squaredNorm();
}

Eigen::MatrixXd plus_plus_init(const Eigen::MatrixXd& X, int k, Rng& rng) {
  const int N = static_cast<int>(X.rows());
  Eigen::MatrixXd centers(k, X.cols());
  centers.row(0) = X.row(static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(N))));
  Eigen::VectorXd best = sq_dist_to(X, centers.row(0));
  for (int c = 1; c < k; ++c) {
    const double total = best.sum();
    int pick = 0;
    if (total > 0.0) {
      const double target = rng.uniform() * total;
      double acc = 0.0;
      pick = N - 1;
      for (int j = 0; j < N; ++j) {
        acc += best[j];
        if (acc >= target) {
          pick = j;
          break;
        }
      }
    } else {
      pick = static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(N)));
    }
    centers.row(c) = X.row(pick);
    best = best.cwiseMin(sq_dist_to(X, centers.row(c)));
  }
  return centers;
}

KMeansResult lloyd(const Eigen::MatrixXd& X, int k, Rng rng, int max_iters) {
  const int N = static_cast<int>(X.rows());
  KMeansResult res;
  res.centers = plus_plus_init(X, k, rng);
  res.labels.assign(N, 0);

  Eigen::MatrixXd dists(N, k);
  for (int iter = 0; iter < max_iters; ++iter) {
    for (int c = 0; c < k; ++c) dists.col(c) = sq_dist_to(X, res.centers.row(c));
    bool changed = iter == 0;
    res.inertia = 0.0;
    for (int j = 0; j < N; ++j) {
      int arg = 0;
      dists.row(j).minCoeff(&arg);
      if (arg != res.labels[j]) changed = true;
      res.labels[j] = arg;
      res.inertia += dists(j, arg);
    }
    res.iterations = iter + 1;
    if (!changed) break;

    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, X.cols());
    std::vector<int> counts(k, 0);
    for (int j = 0; j < N; ++j) {
      sums.row(res.labels[j]) += X.row(j);
      counts[res.labels[j]] += 1;
    }
    for (int c = 0; c < k; ++c) {
      if (counts[c] > 0) {
        res.centers.row(c) = sums.row(c) / counts[c];
      } else {
        // Reseed from the point currently worst served by its own center.
        int worst = 0;
        double worst_d = -1.0;
        for (int j = 0; j < N; ++j) {
          const double d = dists(j, res.labels[j]);
          if (d > worst_d) {
            worst_d = d;
            worst = j;
          }
        }
        res.centers.row(c) = X.row(worst);
        changed = true;
      }
    }
  }
  return res;
}

}  // namespace

KMeansResult kmeans(const Eigen::MatrixXd& X, int k, const Rng& rng, int restarts, int max_iters) {
  if (k <= 0) throw std::invalid_argument("kmeans: k must be positive");
  if (X.rows() < k) throw std::invalid_argument("kmeans: fewer points than clusters");
  if (restarts <= 0) throw std::invalid_argument("kmeans: restarts must be positive");

  KMeansResult best;
  best.inertia = std::numeric_limits<double>::infinity();
  for (int r = 0; r < restarts; ++r) {
    KMeansResult cur = lloyd(X, k, rng.derive(static_cast<std::uint64_t>(r)), max_iters);
    if (cur.inertia < best.inertia) best = std::move(cur);
  }
  return best;
}

}  // namespace gmbayes
