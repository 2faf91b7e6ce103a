#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "gmbayes/mixture.hpp"
#include "gmbayes/rng.hpp"
#include "test_util.hpp"

using namespace gmbayes;

TEST_SUITE("mixture") {
  TEST_CASE("validate accepts well-formed models and rejects broken ones") {
    MixtureModel ok = test_util::random_mixture(4, 3, 1);
    CHECK_NOTHROW(ok.validate());

    MixtureModel bad_weights = ok;
    bad_weights.weights[0] += 0.5;
    CHECK_THROWS_AS(bad_weights.validate(), std::invalid_argument);

    MixtureModel negative = ok;
    negative.weights[0] = -negative.weights[0];
    CHECK_THROWS_AS(negative.validate(), std::invalid_argument);

    MixtureModel asym = ok;
    asym.covariances[0](0, 1) += 1.0;
    CHECK_THROWS_AS(asym.validate(), std::invalid_argument);

    MixtureModel mismatch = ok;
    mismatch.factors[0] = 2.0 * mismatch.factors[0];
    CHECK_THROWS_AS(mismatch.validate(), std::invalid_argument);

    MixtureModel shapes = ok;
    shapes.means.pop_back();
    CHECK_THROWS_AS(shapes.validate(), std::invalid_argument);
  }

  TEST_CASE("coordinate-support mixture structure") {
    const std::vector<std::vector<int>> supports = {{0, 2}, {1, 3, 4}};
    const MixtureModel model = mixture_from_coordinate_supports(5, supports);
    CHECK(model.components() == 2);
    CHECK(model.dim() == 5);
    CHECK(model.weights[0] == doctest::Approx(0.5));
    for (int i = 0; i < 2; ++i) {
      CHECK(model.means[i].cwiseAbs().maxCoeff() == 0.0);
      for (int d = 0; d < 5; ++d) {
        const bool in = std::find(supports[i].begin(), supports[i].end(), d) != supports[i].end();
        CHECK(model.covariances[i](d, d) == (in ? 1.0 : 0.0));
      }
      const Eigen::MatrixXd diag_part = model.covariances[i].diagonal().asDiagonal();
      CHECK((model.covariances[i] - diag_part).cwiseAbs().maxCoeff() == 0.0);
    }
    model.validate();
  }

  TEST_CASE("samples stay on the component support") {
    const MixtureModel model = mixture_from_coordinate_supports(6, {{0, 1}, {4, 5}});
    const SampleSet set = sample_mixture(model, Rng(5, 1), 200);
    REQUIRE(set.signals.rows() == 200);
    REQUIRE(static_cast<int>(set.labels.size()) == 200);
    for (int j = 0; j < 200; ++j) {
      const int lab = set.labels[j];
      REQUIRE(lab >= 0);
      REQUIRE(lab < 2);
      // Off-support coordinates vanish (degenerate Gaussian).
      if (lab == 0) {
        CHECK(set.signals.row(j).tail(4).cwiseAbs().maxCoeff() <= 1e-12);
      } else {
        CHECK(set.signals.row(j).head(4).cwiseAbs().maxCoeff() <= 1e-12);
      }
    }
  }

  TEST_CASE("sample moments match the model") {
    MixtureModel model;
    model.weights = Eigen::VectorXd::Constant(1, 1.0);
    Eigen::VectorXd mu(2);
    mu << 1.0, -2.0;
    Eigen::MatrixXd B(2, 2);
    B << 1.0, 0.0, 0.5, 0.8;
    model.means.push_back(mu);
    model.factors.push_back(B);
    model.covariances.push_back(B * B.transpose());
    model.validate();

    const int N = 60000;
    const SampleSet set = sample_mixture(model, Rng(11, 2), N);
    const Eigen::VectorXd mean = set.signals.colwise().mean().transpose();
    CHECK((mean - mu).cwiseAbs().maxCoeff() < 0.02);

    const Eigen::MatrixXd centered = set.signals.rowwise() - mean.transpose();
    const Eigen::MatrixXd cov = centered.transpose() * centered / N;
    CHECK((cov - model.covariances[0]).cwiseAbs().maxCoeff() < 0.03);
  }

  TEST_CASE("component frequencies follow the weights") {
    MixtureModel model = mixture_from_coordinate_supports(3, {{0}, {1}, {2}});
    model.weights << 0.6, 0.3, 0.1;
    model.validate();
    const int N = 50000;
    const SampleSet set = sample_mixture(model, Rng(3, 3), N);
    Eigen::Vector3d freq = Eigen::Vector3d::Zero();
    for (int lab : set.labels) freq[lab] += 1.0;
    freq /= N;
    for (int i = 0; i < 3; ++i) CHECK(std::abs(freq[i] - model.weights[i]) < 0.01);
  }

  TEST_CASE("sampling a prefix is independent of the requested count") {
    const MixtureModel model = test_util::random_mixture(4, 2, 9);
    const SampleSet small = sample_mixture(model, Rng(1, 4), 10);
    const SampleSet large = sample_mixture(model, Rng(1, 4), 50);
    CHECK((large.signals.topRows(10) - small.signals).cwiseAbs().maxCoeff() == 0.0);
    for (int j = 0; j < 10; ++j) CHECK(small.labels[j] == large.labels[j]);
  }

  TEST_CASE("covariance_factor reproduces the matrix and truncates rank") {
    Rng rng(8, 0);
    const Eigen::MatrixXd B0 = test_util::random_matrix(rng, 5, 2);
    const Eigen::MatrixXd S = B0 * B0.transpose();
    const Eigen::MatrixXd F = covariance_factor(S);
    CHECK(F.cols() == 2);  // numerical rank
    CHECK((F * F.transpose() - S).cwiseAbs().maxCoeff() < 1e-10);
  }
}
