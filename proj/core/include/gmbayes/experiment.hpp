#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <json.hpp>
#include <string>
#include <vector>

#include "gmbayes/datasets.hpp"

namespace gmbayes {

enum class Problem { denoising, deblurring };
enum class ClusteringMode { learned, exact, random };

struct MethodConfig {
  // supervised (method A)
  int epochs = 80;
  int batch_size = 64;
  double learning_rate = 1e-3;
  int rank = 0;  // <= 0: dataset sparsity when known, otherwise min(n, 32)
  // dictionary learning (methods C, D)
  int dict_epochs = 12;
  double dict_lambda = 0.0;  // <= 0: 0.1 * mean training signal norm
  // iterative solvers (denoising with orthogonal bases converges in one step)
  int solver_max_iters = 500;
  double solver_tol = 1e-8;
  // hyperparameter tuning
  int tune_subset = 256;
};

struct ExperimentConfig {
  DatasetSpec dataset;
  Problem problem = Problem::denoising;
  double blur_sigma = 1.0;
  double noise_percent = 10.0;
  double noise_sigma_override = 0.0;  // > 0 bypasses the amplitude rule
  std::vector<std::string> methods;   // "A".."J" and "true"
  ClusteringMode clustering = ClusteringMode::learned;
  std::vector<double> lambda_grid;  // empty: {1e-5 .. 1e1}, refined once
  std::vector<int> sparsity_grid;   // empty: {1, 2, 5, 10, 20, 50} within [1, n]
  MethodConfig method_config;
  std::uint64_t seed = 0;
  std::string out_dir;  // empty: no artifacts written

  nlohmann::json to_json() const;
  static ExperimentConfig from_json(const nlohmann::json& j);
};

struct MethodResult {
  std::string id;
  bool ok = false;
  std::string error;
  double mean_relative_mse = 0.0;  // fraction, not percent
  double stderr_relative_mse = 0.0;
  Eigen::VectorXd per_signal;
  nlohmann::json hyperparameters;
  double wall_seconds = 0.0;
};

struct MetricsReport {
  int schema_version = 1;
  ExperimentConfig config;
  double noise_sigma = 0.0;
  std::vector<MethodResult> results;

  bool all_ok() const;
  /// Deterministic payload; wall times are never included here.
  nlohmann::json to_json() const;
};

/// sigma = percent/100 * the largest training-signal amplitude, where the
/// amplitude of a signal is its peak deviation from its own mean level.
double noise_sigma(const Eigen::MatrixXd& train, double percent);

/// Grid argmin with ties broken toward the smaller value; optionally refines
/// once geometrically (factors 10^{+-1/4}, 10^{+-1/2}) around the best point.
struct TuneResult {
  double value = 0.0;
  double score = 0.0;
  std::vector<std::pair<double, double>> trace;  // (value, score)
};
TuneResult tune_grid(const std::vector<double>& grid, const std::function<double(double)>& score,
                     bool refine_geometric);

/// Runs every requested method; a method failure is recorded in its entry and
/// does not abort the others.  With out_dir set, writes results.json,
/// timings.json, summary.csv and SVG plots.
MetricsReport run_experiment(const ExperimentConfig& config);

/// Default paper/mini configuration for one dataset column of a table.
ExperimentConfig table_config(int table_id, int dataset_id, const std::string& scale, std::uint64_t seed);

struct TableRun {
  int table_id = 0;
  std::string scale;
  std::vector<MetricsReport> columns;  // one per dataset
  bool all_ok() const;
};

/// Reproduces table 1 (denoising), 2 (clustering ablation) or 3 (deblurring).
/// Writes table.csv / table.json (+ per-column artifacts) under out_dir; at
/// paper scale the CSV gains columns comparing against the published values.
/// methods_override, when nonempty, replaces each column's method list
/// (ignored for table 2, whose rows are clustering modes).
TableRun reproduce_table(int table_id, const std::string& scale, std::uint64_t seed, const std::string& out_dir,
                         const std::vector<std::string>& methods_override = {});

}  // namespace gmbayes
