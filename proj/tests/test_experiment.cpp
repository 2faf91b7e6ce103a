#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <vector>

#include "gmbayes/experiment.hpp"
#include "gmbayes/metrics.hpp"
#include "test_util.hpp"

using namespace gmbayes;

namespace {

ExperimentConfig tiny_config() {
  ExperimentConfig cfg;
  cfg.dataset.id = 1;
  cfg.dataset.n = 20;
  cfg.dataset.sparsity = 3;
  cfg.dataset.components = 3;
  cfg.dataset.train_count = 300;
  cfg.dataset.test_count = 40;
  cfg.dataset.seed = 7;
  cfg.seed = 7;
  cfg.noise_percent = 10.0;
  cfg.method_config.tune_subset = 32;
  return cfg;
}

}  // namespace

TEST_SUITE("experiment") {
  TEST_CASE("relative mse identities") {
    Eigen::MatrixXd X(2, 3);
    X << 1, 2, 2, 0, 3, 4;
    CHECK(relative_mse(X.row(0).transpose(), X.row(0).transpose()) == 0.0);
    CHECK(relative_mse(X.row(1).transpose(), Eigen::VectorXd::Zero(3)) == 1.0);
    const Eigen::VectorXd rows = relative_mse_rows(X, X);
    CHECK(rows.cwiseAbs().maxCoeff() == 0.0);
    CHECK(mean(rows) == 0.0);
    CHECK_THROWS(relative_mse(Eigen::VectorXd::Zero(3), Eigen::VectorXd::Ones(3)));
  }

  TEST_CASE("noise sigma follows the amplitude rule") {
    Eigen::MatrixXd train(2, 4);
    // row means 0.875 and -0.25; peak deviations 1.125 and 0.75
    train << 0.0, 1.0, 2.0, 0.5, -1.0, 0.0, 0.5, -0.5;
    CHECK(noise_sigma(train, 10.0) == doctest::Approx(0.1125).epsilon(1e-12));
    CHECK(noise_sigma(train, 5.0) == doctest::Approx(0.05625).epsilon(1e-12));
    CHECK_THROWS(noise_sigma(Eigen::MatrixXd(), 10.0));
    CHECK_THROWS(noise_sigma(train, 0.0));
    CHECK_THROWS(noise_sigma(train, -1.0));
    // constant signals have zero amplitude
    CHECK_THROWS(noise_sigma(Eigen::MatrixXd::Ones(3, 4), 10.0));
  }

  TEST_CASE("grid tuning picks the argmin with ties toward smaller values") {
    auto quad = [](double v) { return (v - 3.0) * (v - 3.0); };
    const TuneResult r = tune_grid({1.0, 2.0, 3.0, 4.0}, quad, false);
    CHECK(r.value == 3.0);
    CHECK(r.score == 0.0);
    CHECK(r.trace.size() == 4);

    auto flat = [](double) { return 1.0; };
    const TuneResult tie = tune_grid({5.0, 1.0, 2.0}, flat, false);
    CHECK(tie.value == 1.0);

    const TuneResult single = tune_grid({0.25}, quad, false);
    CHECK(single.value == 0.25);

    CHECK_THROWS(tune_grid({}, quad, false));
  }

  TEST_CASE("geometric refinement cannot make the score worse") {
    auto score = [](double v) { return std::abs(std::log(v / 2.7)); };
    const std::vector<double> grid = {0.01, 0.1, 1.0, 10.0};
    const TuneResult coarse = tune_grid(grid, score, false);
    const TuneResult refined = tune_grid(grid, score, true);
    CHECK(refined.score <= coarse.score);
    CHECK(refined.trace.size() > coarse.trace.size());
    // refinement samples geometric neighbors of the coarse winner
    CHECK(refined.value != coarse.value);
    CHECK(score(refined.value) == refined.score);
  }

  TEST_CASE("config json round trip") {
    ExperimentConfig cfg = tiny_config();
    cfg.problem = Problem::deblurring;
    cfg.blur_sigma = 2.5;
    cfg.methods = {"true", "B", "C"};
    cfg.clustering = ClusteringMode::random;
    cfg.lambda_grid = {0.1, 1.0};
    cfg.sparsity_grid = {2, 4};
    cfg.noise_sigma_override = 0.05;
    cfg.method_config.epochs = 17;
    cfg.method_config.dict_lambda = 0.3;
    cfg.out_dir = "somewhere";  // never serialized: artifacts stay path-independent

    const nlohmann::json j = cfg.to_json();
    CHECK_FALSE(j.contains("out_dir"));
    const ExperimentConfig back = ExperimentConfig::from_json(j);
    CHECK(back.to_json() == j);
    CHECK(back.problem == Problem::deblurring);
    CHECK(back.blur_sigma == 2.5);
    CHECK(back.methods == cfg.methods);
    CHECK(back.clustering == ClusteringMode::random);
    CHECK(back.lambda_grid == cfg.lambda_grid);
    CHECK(back.sparsity_grid == cfg.sparsity_grid);
    CHECK(back.method_config.epochs == 17);
    CHECK(back.method_config.dict_lambda == 0.3);
    CHECK(back.dataset.n == 20);
    CHECK(back.seed == 7);
  }

  TEST_CASE("unknown json keys are rejected") {
    nlohmann::json j = tiny_config().to_json();
    j["surprise"] = 1;
    CHECK_THROWS(ExperimentConfig::from_json(j));

    nlohmann::json j2 = tiny_config().to_json();
    j2["dataset"]["surprise"] = 1;
    CHECK_THROWS(ExperimentConfig::from_json(j2));

    nlohmann::json j3 = tiny_config().to_json();
    j3["method_config"]["surprise"] = 1;
    CHECK_THROWS(ExperimentConfig::from_json(j3));
  }

  TEST_CASE("dataset seed defaults to the experiment seed") {
    nlohmann::json j = tiny_config().to_json();
    j["seed"] = 99;
    j["dataset"].erase("seed");
    const ExperimentConfig cfg = ExperimentConfig::from_json(j);
    CHECK(cfg.seed == 99);
    CHECK(cfg.dataset.seed == 99);

    // an explicit dataset seed survives
    nlohmann::json j2 = tiny_config().to_json();
    j2["seed"] = 99;
    j2["dataset"]["seed"] = 3;
    const ExperimentConfig cfg2 = ExperimentConfig::from_json(j2);
    CHECK(cfg2.dataset.seed == 3);
  }

  TEST_CASE("unsupervised pipeline on a tiny problem") {
    test_util::TempDir dir("gmb_exp_unsup");
    ExperimentConfig cfg = tiny_config();
    cfg.methods = {"B"};
    cfg.out_dir = dir.str();
    const MetricsReport report = run_experiment(cfg);
    REQUIRE(report.results.size() == 1);
    const MethodResult& r = report.results[0];
    CHECK(r.id == "B");
    CHECK(r.ok);
    CHECK(r.error.empty());
    CHECK(report.all_ok());
    CHECK(std::isfinite(r.mean_relative_mse));
    CHECK(r.mean_relative_mse > 0.0);
    CHECK(r.mean_relative_mse < 1.0);  // better than predicting zero
    REQUIRE(r.per_signal.size() == 40);
    CHECK(r.mean_relative_mse == doctest::Approx(mean(r.per_signal)).epsilon(1e-12));
    CHECK(r.stderr_relative_mse == doctest::Approx(standard_error(r.per_signal)).epsilon(1e-12));
    CHECK(report.noise_sigma > 0.0);

    namespace fs = std::filesystem;
    CHECK(fs::exists(fs::path(dir.str()) / "results.json"));
    CHECK(fs::exists(fs::path(dir.str()) / "timings.json"));
    CHECK(fs::exists(fs::path(dir.str()) / "summary.csv"));
    CHECK(fs::exists(fs::path(dir.str()) / "models" / "unsupervised.gmxb"));

    // deterministic artifacts: a rerun writes byte-identical results.json
    const std::string first = test_util::read_file((fs::path(dir.str()) / "results.json").string());
    CHECK(first.find("wall") == std::string::npos);
    const MetricsReport again = run_experiment(cfg);
    const std::string second = test_util::read_file((fs::path(dir.str()) / "results.json").string());
    CHECK(first == second);
    CHECK(again.results[0].mean_relative_mse == r.mean_relative_mse);
  }

  TEST_CASE("oracle beats unsupervised on its own data") {
    ExperimentConfig cfg = tiny_config();
    cfg.methods = {"true", "B"};
    const MetricsReport report = run_experiment(cfg);
    REQUIRE(report.results.size() == 2);
    REQUIRE(report.all_ok());
    const double mse_true = report.results[0].mean_relative_mse;
    const double mse_b = report.results[1].mean_relative_mse;
    CHECK(mse_true <= mse_b * (1.0 + 1e-9));
  }

  TEST_CASE("method failures are isolated") {
    ExperimentConfig cfg = tiny_config();
    cfg.dataset.id = 2;  // no true model available
    cfg.methods = {"true", "C"};
    const MetricsReport report = run_experiment(cfg);
    REQUIRE(report.results.size() == 2);
    CHECK_FALSE(report.results[0].ok);
    CHECK_FALSE(report.results[0].error.empty());
    CHECK(report.results[1].ok);
    CHECK_FALSE(report.all_ok());
  }

  TEST_CASE("unknown methods are rejected up front") {
    ExperimentConfig cfg = tiny_config();
    cfg.methods = {"B", "Z"};
    CHECK_THROWS(run_experiment(cfg));
    cfg.methods = {};
    CHECK_THROWS(run_experiment(cfg));
  }

  TEST_CASE("deblurring runs end to end") {
    ExperimentConfig cfg = tiny_config();
    cfg.problem = Problem::deblurring;
    cfg.blur_sigma = 1.0;
    cfg.methods = {"true"};
    const MetricsReport report = run_experiment(cfg);
    REQUIRE(report.all_ok());
    CHECK(report.results[0].mean_relative_mse < 1.0);
  }

  TEST_CASE("results json schema") {
    ExperimentConfig cfg = tiny_config();
    cfg.methods = {"E"};
    const MetricsReport report = run_experiment(cfg);
    const nlohmann::json j = report.to_json();
    CHECK(j["schema_version"] == 1);
    CHECK(j.contains("config"));
    CHECK(j.contains("noise_sigma"));
    REQUIRE(j["results"].is_array());
    const auto& entry = j["results"][0];
    CHECK(entry["id"] == "E");
    CHECK(entry["ok"] == true);
    CHECK(entry.contains("mean_relative_mse_percent"));
    CHECK(entry.contains("stderr_percent"));
    CHECK(entry.contains("per_signal_percent"));
    CHECK(entry.contains("hyperparameters"));
    CHECK_FALSE(entry.contains("wall_seconds"));
    CHECK_FALSE(entry.contains("error"));
    // percent scaling
    const double pct = entry["mean_relative_mse_percent"].get<double>();
    CHECK(pct == doctest::Approx(100.0 * report.results[0].mean_relative_mse).epsilon(1e-12));
  }
}
