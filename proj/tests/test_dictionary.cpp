#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "gmbayes/dictionary.hpp"
#include "gmbayes/rng.hpp"
#include "test_util.hpp"

using namespace gmbayes;

namespace {

Dictionary random_dictionary(Rng& rng, int n, int d) {
  Dictionary dict;
  dict.atoms = test_util::random_matrix(rng, n, d);
  dict.atoms.colwise().normalize();
  return dict;
}

double code_kkt_gap(const Dictionary& dict, const Eigen::VectorXd& z, double lambda, const Eigen::VectorXd& beta) {
  const Eigen::VectorXd grad = dict.atoms.transpose() * (dict.atoms * beta - z);
  double gap = 0.0;
  for (int j = 0; j < beta.size(); ++j) {
    if (beta[j] != 0.0)
      gap = std::max(gap, std::abs(grad[j] + lambda * (beta[j] > 0 ? 1.0 : -1.0)));
    else
      gap = std::max(gap, std::max(0.0, std::abs(grad[j]) - lambda));
  }
  return gap;
}

}  // namespace

TEST_SUITE("dictionary") {
  TEST_CASE("dictionary validation") {
    Rng rng(61, 0);
    Dictionary good = random_dictionary(rng, 6, 4);
    CHECK_NOTHROW(good.validate());

    Dictionary unnorm = good;
    unnorm.atoms.col(1) *= 2.0;
    CHECK_THROWS_AS(unnorm.validate(), std::invalid_argument);

    Dictionary deficient = good;
    deficient.atoms.col(2) = deficient.atoms.col(0);
    CHECK_THROWS_AS(deficient.validate(), std::invalid_argument);
  }

  TEST_CASE("sparse coding satisfies the lasso optimality conditions") {
    Rng rng(62, 0);
    for (int trial = 0; trial < 10; ++trial) {
      const Dictionary dict = random_dictionary(rng, 8, 5);
      const Eigen::VectorXd z = test_util::random_vector(rng, 8);
      const double lambda = 0.05 + 0.3 * rng.uniform();
      const Eigen::VectorXd beta = sparse_code(dict, z, lambda);
      const double scale = std::max(1.0, (dict.atoms.transpose() * z).cwiseAbs().maxCoeff());
      CHECK(code_kkt_gap(dict, z, lambda, beta) < 1e-6 * scale);
    }
  }

  TEST_CASE("lambda zero reduces to least squares") {
    Rng rng(63, 0);
    const Dictionary dict = random_dictionary(rng, 8, 5);
    const Eigen::VectorXd z = test_util::random_vector(rng, 8);
    const Eigen::VectorXd beta = sparse_code(dict, z, 0.0);
    const Eigen::VectorXd ls = dict.atoms.colPivHouseholderQr().solve(z);
    CHECK((beta - ls).cwiseAbs().maxCoeff() < 1e-9);
  }

  TEST_CASE("exhausted pass budget throws") {
    Rng rng(64, 0);
    const Dictionary dict = random_dictionary(rng, 8, 6);
    const Eigen::VectorXd z = test_util::random_vector(rng, 8);
    SparseCodeOptions opts;
    opts.max_passes = 1;
    opts.kkt_tol = 1e-14;
    CHECK_THROWS_AS(sparse_code(dict, z, 0.1, opts), std::runtime_error);
  }

  TEST_CASE("dictionary learning decreases the coding objective") {
    Rng rng(65, 0);
    // signals synthesized from a planted dictionary with 2-sparse codes
    const int n = 12, d = 6, count = 80;
    const Dictionary planted = random_dictionary(rng, n, d);
    Eigen::MatrixXd X(count, n);
    for (int i = 0; i < count; ++i) {
      Eigen::VectorXd code = Eigen::VectorXd::Zero(d);
      const int a = static_cast<int>(rng.uniform_below(d));
      int b = static_cast<int>(rng.uniform_below(d));
      if (b == a) b = (b + 1) % d;
      code[a] = rng.normal(0.0, 2.0);
      code[b] = rng.normal(0.0, 2.0);
      X.row(i) = (planted.atoms * code).transpose();
    }
    DictLearnOptions opts;
    opts.epochs = 12;
    opts.seed = 9;
    const DictLearnResult result = dict_learn(X, d, 0.05, opts);
    REQUIRE(result.objective.size() == 12);
    CHECK(result.objective.back() < result.objective.front());
    CHECK_NOTHROW(result.dict.validate());
    // learned dictionary codes the training data well
    double err = 0.0;
    for (int i = 0; i < count; ++i) {
      const Eigen::VectorXd beta = sparse_code(result.dict, X.row(i).transpose(), 0.05);
      err += (X.row(i).transpose() - result.dict.atoms * beta).squaredNorm() / X.row(i).squaredNorm();
    }
    CHECK(err / count < 0.05);
  }

  TEST_CASE("dictionary learning is deterministic in the seed") {
    Rng rng(66, 0);
    const Eigen::MatrixXd X = test_util::random_matrix(rng, 40, 8);
    DictLearnOptions opts;
    opts.epochs = 5;
    opts.seed = 4;
    const DictLearnResult a = dict_learn(X, 4, 0.1, opts);
    const DictLearnResult b = dict_learn(X, 4, 0.1, opts);
    CHECK((a.dict.atoms - b.dict.atoms).cwiseAbs().maxCoeff() == 0.0);
    CHECK(a.objective == b.objective);
  }

  TEST_CASE("unused atoms are replaced") {
    Rng rng(67, 0);
    // one-dimensional data cannot use more than one direction; extra atoms
    // must be recycled onto samples rather than left dead.
    Eigen::MatrixXd X(30, 6);
    const Eigen::VectorXd dir = test_util::random_vector(rng, 6).normalized();
    for (int i = 0; i < 30; ++i) X.row(i) = ((1.0 + i % 5) * dir).transpose();
    DictLearnOptions opts;
    opts.epochs = 3;
    opts.seed = 2;
    const DictLearnResult result = dict_learn(X, 3, 0.5, opts);
    CHECK(result.replaced_atoms > 0);
    // replacement recycles samples, so every atom stays unit norm
    for (int j = 0; j < result.dict.size(); ++j)
      CHECK(result.dict.atoms.col(j).norm() == doctest::Approx(1.0).epsilon(1e-10));
  }

  TEST_CASE("one-step reconstruction identity for denoising") {
    // A = I, step 1: the first proximal step is D * sparse_code(D, y, lambda)
    // and immediately reaches a fixed point.
    Rng rng(68, 0);
    const Dictionary dict = random_dictionary(rng, 10, 6);
    const Eigen::VectorXd y = test_util::random_vector(rng, 10);
    DlOptions opts;
    opts.lambda = 0.3;
    opts.step = 1.0;
    opts.max_iters = 1;
    const DlResult result = dl_reconstruct(y, Eigen::MatrixXd::Identity(10, 10), dict, opts);
    const Eigen::VectorXd expected = dict.atoms * sparse_code(dict, y, opts.lambda);
    CHECK((result.x - expected).cwiseAbs().maxCoeff() <= 1e-12);
    opts.max_iters = 30;
    const DlResult longer = dl_reconstruct(y, Eigen::MatrixXd::Identity(10, 10), dict, opts);
    CHECK((longer.x - expected).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(longer.stats.converged);
  }

  TEST_CASE("reconstruction under a compressive operator improves on the pseudoinverse") {
    Rng rng(69, 0);
    const int n = 16, d = 8, m = 10;
    const Dictionary dict = random_dictionary(rng, n, d);
    Eigen::VectorXd code = Eigen::VectorXd::Zero(d);
    code[1] = 1.5;
    code[6] = -2.0;
    const Eigen::VectorXd x_true = dict.atoms * code;
    const Eigen::MatrixXd A = test_util::random_matrix(rng, m, n) / std::sqrt(static_cast<double>(m));
    const Eigen::VectorXd y = A * x_true;
    DlOptions opts;
    opts.lambda = 1e-3;
    opts.max_iters = 4000;
    opts.tol = 1e-12;
    const DlResult result = dl_reconstruct(y, A, dict, opts);
    const Eigen::VectorXd naive = A.colPivHouseholderQr().solve(y);
    const double rel = (result.x - x_true).norm() / x_true.norm();
    const double rel_naive = (naive - x_true).norm() / x_true.norm();
    CHECK(rel < 0.05);
    CHECK(rel < rel_naive);
  }

  TEST_CASE("group reconstruction selects the generating dictionary") {
    Rng rng(70, 0);
    const int n = 12;
    std::vector<Dictionary> dicts;
    for (int i = 0; i < 3; ++i) dicts.push_back(random_dictionary(rng, n, 4));
    Eigen::VectorXd code = Eigen::VectorXd::Zero(4);
    code[0] = 2.0;
    code[3] = -1.0;
    const Eigen::VectorXd y = dicts[1].atoms * code;  // clean signal from dictionary 1
    DlOptions opts;
    opts.lambda = 0.05;
    opts.step = 1.0;
    opts.max_iters = 1;
    const GroupDlResult result = group_dl_reconstruct(y, Eigen::MatrixXd::Identity(n, n), dicts, opts);
    CHECK(result.selected == 1);
    CHECK((result.x - y).norm() / y.norm() < 0.1);
    // one-step path matches the per-dictionary argmin computed directly
    int best = -1;
    double best_score = 0.0;
    Eigen::VectorXd best_x;
    for (size_t i = 0; i < dicts.size(); ++i) {
      const Eigen::VectorXd beta = sparse_code(dicts[i], y, opts.lambda);
      const Eigen::VectorXd p = dicts[i].atoms * beta;
      const double score = 0.5 * (y - p).squaredNorm() + opts.lambda * beta.lpNorm<1>();
      if (best < 0 || score < best_score) {
        best = static_cast<int>(i);
        best_score = score;
        best_x = p;
      }
    }
    CHECK(result.selected == best);
    CHECK((result.x - best_x).cwiseAbs().maxCoeff() <= 1e-12);
  }

  TEST_CASE("group selection ties keep the lowest index") {
    // duplicate dictionaries: both give identical objectives
    Rng rng(71, 0);
    const Dictionary dict = random_dictionary(rng, 8, 4);
    const std::vector<Dictionary> dicts = {dict, dict};
    const Eigen::VectorXd y = test_util::random_vector(rng, 8);
    DlOptions opts;
    opts.lambda = 0.1;
    opts.step = 1.0;
    opts.max_iters = 1;
    const GroupDlResult result = group_dl_reconstruct(y, Eigen::MatrixXd::Identity(8, 8), dicts, opts);
    CHECK(result.selected == 0);
  }
}
