#include "gmbayes/experiment.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <stdexcept>

#include "gmbayes/basis_inference.hpp"
#include "gmbayes/clustering.hpp"
#include "gmbayes/dictionary.hpp"
#include "gmbayes/estimator.hpp"
#include "gmbayes/iht.hpp"
#include "gmbayes/lasso.hpp"
#include "gmbayes/metrics.hpp"
#include "gmbayes/model_io.hpp"
#include "gmbayes/prox.hpp"
#include "gmbayes/rng.hpp"
#include "gmbayes/signal_io.hpp"
#include "gmbayes/svg_plot.hpp"
#include "gmbayes/train.hpp"
#include "gmbayes/wavelet.hpp"

namespace gmbayes {

namespace {

// Harness RNG stream ids (dataset generation uses streams 1..3 internally).
constexpr std::uint64_t kStreamTrainNoise = 0x10;
constexpr std::uint64_t kStreamTestNoise = 0x11;
constexpr std::uint64_t kStreamTuneNoise = 0x12;
constexpr std::uint64_t kStreamTuneSubset = 0x13;
constexpr std::uint64_t kStreamRandomLabels = 0x15;
constexpr std::uint64_t kStreamSupervised = 0x16;
constexpr std::uint64_t kStreamDict = 0x17;
constexpr std::uint64_t kStreamGroupDict = 0x18;

std::string problem_name(Problem p) { return p == Problem::denoising ? "denoising" : "deblurring"; }

Problem problem_from(const std::string& s) {
  if (s == "denoising") return Problem::denoising;
  if (s == "deblurring") return Problem::deblurring;
  throw std::invalid_argument("unknown problem '" + s + "'");
}

std::string clustering_name(ClusteringMode c) {
  switch (c) {
    case ClusteringMode::learned:
      return "learned";
    case ClusteringMode::exact:
      return "exact";
    default:
      return "random";
  }
}

ClusteringMode clustering_from(const std::string& s) {
  if (s == "learned") return ClusteringMode::learned;
  if (s == "exact") return ClusteringMode::exact;
  if (s == "random") return ClusteringMode::random;
  throw std::invalid_argument("unknown clustering mode '" + s + "'");
}

std::vector<double> default_lambda_grid() {
  std::vector<double> grid;
  for (int k = -5; k <= 1; ++k) grid.push_back(std::pow(10.0, k));
  return grid;
}

std::vector<int> default_sparsity_grid(int n) {
  std::vector<int> grid;
  for (int s : {1, 2, 5, 10, 20, 50})
    if (s >= 1 && s <= n) grid.push_back(s);
  return grid;
}

const std::vector<std::string> kAllMethods = {"true", "A", "B", "C", "D", "E", "F", "G", "H", "I", "J"};

struct MethodOutput {
  Eigen::MatrixXd xhat;  // rows match the test set
  nlohmann::json hyper = nlohmann::json::object();
};

struct Context {
  const ExperimentConfig& cfg;
  Dataset data;
  ForwardOperator op;
  Eigen::MatrixXd A;
  double sigma = 0.0;
  NoiseModel noise;
  Eigen::MatrixXd Ytrain;  // observations of the full training set
  Eigen::MatrixXd Ytest;
  std::vector<int> tune_idx;
  Eigen::MatrixXd Xtune, Ytune;

  explicit Context(const ExperimentConfig& config)
      : cfg(config), data(generate_dataset(config.dataset)), op(make_operator(config)), noise(make_noise(config)) {}

  static ForwardOperator make_operator(const ExperimentConfig& config) {
    if (config.problem == Problem::denoising) return ForwardOperator::identity(config.dataset.n);
    return ForwardOperator::gaussian_blur(config.dataset.n, config.blur_sigma);
  }

  NoiseModel make_noise(const ExperimentConfig& config) {
    sigma = config.noise_sigma_override > 0.0 ? config.noise_sigma_override
                                              : gmbayes::noise_sigma(data.train, config.noise_percent);
    if (sigma <= 0.0)
      throw std::invalid_argument("experiment: calibrated noise level is zero (constant training signals?)");
    return NoiseModel::isotropic(config.dataset.n, sigma);
  }

  Eigen::MatrixXd observe(const Eigen::MatrixXd& X, std::uint64_t stream) const {
    Eigen::MatrixXd Y(X.rows(), A.rows());
    for (int j = 0; j < X.rows(); ++j) Y.row(j) = op.apply(X.row(j).transpose()).transpose();
    Y += sample_noise(noise, Rng(cfg.seed, stream), static_cast<int>(X.rows()));
    return Y;
  }

  void setup() {
    A = op.materialize();
    Ytrain = observe(data.train, kStreamTrainNoise);
    Ytest = observe(data.test, kStreamTestNoise);

    const int subset = std::min<int>(cfg.method_config.tune_subset, static_cast<int>(data.train.rows()));
    if (subset <= 0) throw std::invalid_argument("experiment: tune_subset must be positive");
    std::vector<int> order(data.train.rows());
    std::iota(order.begin(), order.end(), 0);
    Rng subset_rng(cfg.seed, kStreamTuneSubset);
    subset_rng.shuffle(order);
    tune_idx.assign(order.begin(), order.begin() + subset);
    Xtune.resize(subset, data.train.cols());
    for (int j = 0; j < subset; ++j) Xtune.row(j) = data.train.row(tune_idx[j]);
    Ytune = observe(Xtune, kStreamTuneNoise);
  }

  // ---- caches ----
  std::optional<std::vector<int>> labels_cache;
  std::optional<GroupBasisSet> gbases_cache;
  std::optional<Eigen::MatrixXd> svd_cache;
  struct WaveletCache {
    WaveletBasis basis;
    int npad = 0;
    Eigen::MatrixXd synth;  // first n rows of the padded synthesis matrix
    std::vector<int> fixed;
  };
  std::optional<WaveletCache> wavelet_cache;

  const std::vector<int>& cluster_labels() {
    if (labels_cache) return *labels_cache;
    const int k = data.num_classes;
    switch (cfg.clustering) {
      case ClusteringMode::exact:
        labels_cache = data.train_labels;
        break;
      case ClusteringMode::random: {
        Rng rng(cfg.seed, kStreamRandomLabels);
        std::vector<int> labels(data.train.rows());
        for (auto& lab : labels) lab = static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(k)));
        labels_cache = std::move(labels);
        break;
      }
      case ClusteringMode::learned: {
        ClusteringConfig cc;
        cc.num_clusters = k;
        cc.preprocessing = data.spec.id == 1 ? Preprocessing::identity : Preprocessing::finite_difference;
        cc.seed = cfg.seed;
        labels_cache = subspace_cluster(data.train, cc).labels;
        break;
      }
    }
    return *labels_cache;
  }

  const GroupBasisSet& group_bases() {
    if (!gbases_cache) gbases_cache = group_svd_bases(data.train, cluster_labels());
    return *gbases_cache;
  }

  const Eigen::MatrixXd& global_svd_basis() {
    if (!svd_cache) svd_cache = svd_basis(data.train);
    return *svd_cache;
  }

  const WaveletCache& wavelet() {
    if (wavelet_cache) return *wavelet_cache;
    WaveletCache wc;
    wc.basis.levels = 5;
    const int block = 1 << wc.basis.levels;
    wc.npad = ((data.spec.n + block - 1) / block) * block;
    wc.synth = wavelet_synthesis_matrix(wc.npad, wc.basis).topRows(data.spec.n);
    wc.fixed = known_basis_split(wc.npad, wc.basis, wc.basis.levels).fixed;
    wavelet_cache = std::move(wc);
    return *wavelet_cache;
  }

  bool orthogonal_denoising(const Eigen::MatrixXd& M) const {
    // With A = I and M^T M = I the proximal iterations reach their fixed
    // point after one step at t = 1.
    if (cfg.problem != Problem::denoising) return false;
    const Eigen::MatrixXd gram = M.transpose() * M;
    return (gram - Eigen::MatrixXd::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff() < 1e-12;
  }
};

double score_reconstruction(const Context& ctx, const Eigen::MatrixXd& xhat_tune) {
  return mean(relative_mse_rows(ctx.Xtune, xhat_tune));
}

// ---- method implementations ----

MethodOutput run_true(Context& ctx) {
  if (!ctx.data.has_true_model)
    throw std::invalid_argument("method 'true' requires a dataset with a known mixture (dataset 1)");
  PreparedEstimator est = prepare(ctx.data.true_model, ctx.op, ctx.noise);
  MethodOutput out;
  out.xhat = est.estimate_batch(ctx.Ytest);
  return out;
}

MethodOutput run_unsupervised(Context& ctx) {
  const MixtureModel model = estimate_params(ctx.data.train, ctx.cluster_labels());
  PreparedEstimator est = prepare(model, ctx.op, ctx.noise);
  MethodOutput out;
  out.xhat = est.estimate_batch(ctx.Ytest);
  out.hyper["clustering"] = clustering_name(ctx.cfg.clustering);
  out.hyper["components"] = model.components();
  if (!ctx.cfg.out_dir.empty()) {
    const std::filesystem::path dir = std::filesystem::path(ctx.cfg.out_dir) / "models";
    std::filesystem::create_directories(dir);
    save_model(dir / "unsupervised.gmxb", model);
  }
  return out;
}

MethodOutput run_supervised(Context& ctx) {
  const MethodConfig& mc = ctx.cfg.method_config;
  int rank = mc.rank;
  if (rank <= 0) rank = ctx.data.spec.id == 1 ? ctx.data.spec.sparsity : std::min(ctx.data.spec.n, 32);

  const MixtureModel init_model = estimate_params(ctx.data.train, ctx.cluster_labels());
  TrainableParams init = TrainableParams::from_model(init_model, rank);

  TrainConfig tc;
  tc.epochs = mc.epochs;
  tc.batch_size = mc.batch_size;
  tc.learning_rate = mc.learning_rate;
  Rng seeder(ctx.cfg.seed, kStreamSupervised);
  tc.seed = seeder.next_u64();
  TrainResult trained = train(ctx.data.train, ctx.Ytrain, ctx.op, ctx.noise, init, tc);

  PreparedEstimator est = prepare(trained.model, ctx.op, ctx.noise);
  MethodOutput out;
  out.xhat = est.estimate_batch(ctx.Ytest);
  out.hyper["epochs"] = tc.epochs;
  out.hyper["batch_size"] = tc.batch_size;
  out.hyper["learning_rate"] = tc.learning_rate;
  out.hyper["rank"] = rank;
  out.hyper["final_train_risk"] = trained.history.back().risk;
  if (!ctx.cfg.out_dir.empty()) {
    const std::filesystem::path dir(ctx.cfg.out_dir);
    std::filesystem::create_directories(dir / "models");
    std::filesystem::create_directories(dir / "plots");
    save_model(dir / "models" / "supervised.gmxb", trained.model);
    write_loss_history_csv((dir / "supervised_loss.csv").string(), trained.history);
    std::vector<SvgSeries> series(1);
    series[0].label = "train risk";
    series[0].y.resize(static_cast<long>(trained.history.size()));
    for (size_t j = 0; j < trained.history.size(); ++j) series[0].y[static_cast<long>(j)] = trained.history[j].risk;
    write_line_plot_svg((dir / "plots" / "supervised_loss.svg").string(), "supervised training risk", series);
  }
  return out;
}

double dict_learn_lambda(const Context& ctx) {
  if (ctx.cfg.method_config.dict_lambda > 0.0) return ctx.cfg.method_config.dict_lambda;
  return 0.1 * ctx.data.train.rowwise().norm().mean();
}

// Atoms learned on smooth signal families are highly coherent (Gram
// off-diagonals approach 1), where coordinate descent converges slowly.
// Coding accuracy beyond 1e-5 relative KKT has no visible effect on
// reconstruction MSE, so the benchmark trades precision for a budget
// that coherent instances can actually meet.
SparseCodeOptions benchmark_code_options() {
  SparseCodeOptions code;
  code.kkt_tol = 1e-5;
  code.max_passes = 100000;
  return code;
}

// Candidate lambdas whose coding stalls should lose the tuning race, not
// abort the whole method.
double score_or_infinity(const std::function<double()>& score) {
  try {
    return score();
  } catch (const std::runtime_error&) {
    return std::numeric_limits<double>::infinity();
  }
}

MethodOutput run_dictionary(Context& ctx) {
  const int atoms = std::max(1, ctx.data.spec.n / 2);
  const double lambda_learn = dict_learn_lambda(ctx);
  DictLearnOptions dopt;
  dopt.epochs = ctx.cfg.method_config.dict_epochs;
  dopt.code = benchmark_code_options();
  Rng seeder(ctx.cfg.seed, kStreamDict);
  dopt.seed = seeder.next_u64();
  const DictLearnResult learned = dict_learn(ctx.data.train, atoms, lambda_learn, dopt);

  DlOptions solver;
  solver.max_iters = ctx.cfg.method_config.solver_max_iters;
  solver.tol = ctx.cfg.method_config.solver_tol;
  solver.code = dopt.code;
  const bool direct = ctx.cfg.problem == Problem::denoising;
  if (direct) solver.step = 1.0;

  auto reconstruct = [&](const Eigen::MatrixXd& Y, double lambda) {
    Eigen::MatrixXd out(Y.rows(), ctx.data.spec.n);
    for (int j = 0; j < Y.rows(); ++j) {
      if (direct) {
        out.row(j) =
            (learned.dict.atoms * sparse_code(learned.dict, Y.row(j).transpose(), lambda, solver.code)).transpose();
      } else {
        DlOptions o = solver;
        o.lambda = lambda;
        out.row(j) = dl_reconstruct(Y.row(j).transpose(), ctx.A, learned.dict, o).x.transpose();
      }
    }
    return out;
  };

  const std::vector<double> grid = ctx.cfg.lambda_grid.empty() ? default_lambda_grid() : ctx.cfg.lambda_grid;
  const TuneResult tuned = tune_grid(
      grid,
      [&](double lambda) {
        return score_or_infinity([&] { return score_reconstruction(ctx, reconstruct(ctx.Ytune, lambda)); });
      },
      true);

  MethodOutput out;
  out.xhat = reconstruct(ctx.Ytest, tuned.value);
  out.hyper["lambda"] = tuned.value;
  out.hyper["lambda_learn"] = lambda_learn;
  out.hyper["atoms"] = atoms;
  out.hyper["replaced_atoms"] = learned.replaced_atoms;
  return out;
}

MethodOutput run_group_dictionary(Context& ctx) {
  const std::vector<int>& labels = ctx.cluster_labels();
  std::vector<int> ids;
  for (int lab : labels)
    if (std::find(ids.begin(), ids.end(), lab) == ids.end()) ids.push_back(lab);
  std::sort(ids.begin(), ids.end());

  const int L = static_cast<int>(ids.size());
  const double lambda_learn = dict_learn_lambda(ctx);
  const int atoms = std::max(1, ctx.data.spec.n / (2 * std::max(L, 1)));

  std::vector<Dictionary> dicts;
  for (size_t c = 0; c < ids.size(); ++c) {
    std::vector<int> members;
    for (int j = 0; j < static_cast<int>(labels.size()); ++j)
      if (labels[j] == ids[c]) members.push_back(j);
    Eigen::MatrixXd rows(members.size(), ctx.data.spec.n);
    for (size_t j = 0; j < members.size(); ++j) rows.row(static_cast<int>(j)) = ctx.data.train.row(members[j]);
    DictLearnOptions dopt;
    dopt.epochs = ctx.cfg.method_config.dict_epochs;
    dopt.code = benchmark_code_options();
    Rng seeder = Rng(ctx.cfg.seed, kStreamGroupDict).derive(c);
    dopt.seed = seeder.next_u64();
    const int cluster_atoms = std::min<int>(atoms, static_cast<int>(members.size()));
    dicts.push_back(dict_learn(rows, cluster_atoms, lambda_learn, dopt).dict);
  }

  DlOptions solver;
  solver.max_iters = ctx.cfg.method_config.solver_max_iters;
  solver.tol = ctx.cfg.method_config.solver_tol;
  solver.code = benchmark_code_options();
  const bool direct = ctx.cfg.problem == Problem::denoising;
  if (direct) solver.step = 1.0;

  auto reconstruct = [&](const Eigen::MatrixXd& Y, double lambda) {
    Eigen::MatrixXd out(Y.rows(), ctx.data.spec.n);
    for (int j = 0; j < Y.rows(); ++j) {
      DlOptions o = solver;
      o.lambda = lambda;
      if (direct) o.max_iters = 1;
      out.row(j) = group_dl_reconstruct(Y.row(j).transpose(), ctx.A, dicts, o).x.transpose();
    }
    return out;
  };

  const std::vector<double> grid = ctx.cfg.lambda_grid.empty() ? default_lambda_grid() : ctx.cfg.lambda_grid;
  const TuneResult tuned = tune_grid(
      grid,
      [&](double lambda) {
        return score_or_infinity([&] { return score_reconstruction(ctx, reconstruct(ctx.Ytune, lambda)); });
      },
      true);

  MethodOutput out;
  out.xhat = reconstruct(ctx.Ytest, tuned.value);
  out.hyper["lambda"] = tuned.value;
  out.hyper["lambda_learn"] = lambda_learn;
  out.hyper["atoms_per_group"] = atoms;
  out.hyper["groups"] = L;
  return out;
}

// IHT variants share the tuning-over-s skeleton.
MethodOutput run_iht_like(Context& ctx, const Eigen::MatrixXd& M,
                          const std::function<SparsitySet(int)>& set_for_s, nlohmann::json base_hyper) {
  IhtOptions opts;
  opts.max_iters = ctx.cfg.method_config.solver_max_iters;
  opts.tol = ctx.cfg.method_config.solver_tol;
  if (ctx.orthogonal_denoising(M)) opts.step = 1.0;

  auto reconstruct = [&](const Eigen::MatrixXd& Y, int s) {
    const Eigen::MatrixXd beta = iht_batch(Y.transpose(), ctx.A, M, set_for_s(s), opts);
    return Eigen::MatrixXd((M * beta).transpose());
  };

  const std::vector<int> grid =
      ctx.cfg.sparsity_grid.empty() ? default_sparsity_grid(static_cast<int>(M.cols())) : ctx.cfg.sparsity_grid;
  std::vector<double> as_double(grid.begin(), grid.end());
  const TuneResult tuned = tune_grid(
      as_double, [&](double s) { return score_reconstruction(ctx, reconstruct(ctx.Ytune, static_cast<int>(s))); },
      false);

  MethodOutput out;
  out.xhat = reconstruct(ctx.Ytest, static_cast<int>(tuned.value));
  out.hyper = std::move(base_hyper);
  out.hyper["s"] = static_cast<int>(tuned.value);
  return out;
}

MethodOutput run_iht_svd(Context& ctx) {
  return run_iht_like(
      ctx, ctx.global_svd_basis(), [](int s) { return SparsitySet::top_s(s); },
      nlohmann::json{{"basis", "global_svd"}});
}

MethodOutput run_iht_group_svd(Context& ctx) {
  const GroupBasisSet& gb = ctx.group_bases();
  return run_iht_like(
      ctx, Eigen::MatrixXd::Identity(ctx.data.spec.n, ctx.data.spec.n),
      [&gb](int s) { return SparsitySet::subspace_union_frames(gb.frames(s)); },
      nlohmann::json{{"basis", "group_svd"}, {"fallback", gb.fallback}});
}

MethodOutput run_iht_known(Context& ctx) {
  if (ctx.data.spec.id == 1) {
    return run_iht_like(
        ctx, Eigen::MatrixXd::Identity(ctx.data.spec.n, ctx.data.spec.n),
        [](int s) { return SparsitySet::top_s(s); }, nlohmann::json{{"basis", "canonical"}});
  }
  const auto& wc = ctx.wavelet();
  return run_iht_like(
      ctx, wc.synth, [&wc](int s) { return SparsitySet::top_s_with_passthrough(s, wc.fixed); },
      nlohmann::json{{"basis", "db6"}, {"levels", wc.basis.levels}, {"padded_length", wc.npad}});
}

// LASSO variants share the tuning-over-lambda skeleton.
MethodOutput run_lasso_like(Context& ctx, const Eigen::MatrixXd& M, std::vector<int> unpenalized,
                            nlohmann::json base_hyper) {
  IstaOptions opts;
  opts.max_iters = ctx.cfg.method_config.solver_max_iters;
  opts.tol = ctx.cfg.method_config.solver_tol;
  opts.unpenalized = std::move(unpenalized);
  if (ctx.orthogonal_denoising(M) && opts.unpenalized.empty()) opts.step = 1.0;

  auto reconstruct = [&](const Eigen::MatrixXd& Y, double lambda) {
    IstaOptions o = opts;
    o.lambda = lambda;
    const Eigen::MatrixXd beta = ista_lasso_batch(Y.transpose(), ctx.A, M, o);
    return Eigen::MatrixXd((M * beta).transpose());
  };

  const std::vector<double> grid = ctx.cfg.lambda_grid.empty() ? default_lambda_grid() : ctx.cfg.lambda_grid;
  const TuneResult tuned = tune_grid(
      grid, [&](double lambda) { return score_reconstruction(ctx, reconstruct(ctx.Ytune, lambda)); }, true);

  MethodOutput out;
  out.xhat = reconstruct(ctx.Ytest, tuned.value);
  out.hyper = std::move(base_hyper);
  out.hyper["lambda"] = tuned.value;
  return out;
}

MethodOutput run_lasso_svd(Context& ctx) {
  return run_lasso_like(ctx, ctx.global_svd_basis(), {}, nlohmann::json{{"basis", "global_svd"}});
}

MethodOutput run_lasso_known(Context& ctx) {
  if (ctx.data.spec.id == 1) {
    return run_lasso_like(ctx, Eigen::MatrixXd::Identity(ctx.data.spec.n, ctx.data.spec.n), {},
                          nlohmann::json{{"basis", "canonical"}});
  }
  const auto& wc = ctx.wavelet();
  return run_lasso_like(ctx, wc.synth, wc.fixed,
                        nlohmann::json{{"basis", "db6"}, {"levels", wc.basis.levels}, {"padded_length", wc.npad}});
}

MethodOutput run_group_lasso(Context& ctx) {
  const GroupBasisSet& gb = ctx.group_bases();
  const GroupBases groups = gb.group_bases();

  GroupLassoOptions opts;
  opts.max_iters = ctx.cfg.method_config.solver_max_iters;
  opts.tol = ctx.cfg.method_config.solver_tol;

  auto reconstruct = [&](const Eigen::MatrixXd& Y, double lambda) {
    GroupLassoOptions o = opts;
    o.lambda = lambda;
    const Eigen::MatrixXd beta = group_lasso_batch(Y.transpose(), ctx.A, groups, o);
    Eigen::MatrixXd xhat = Eigen::MatrixXd::Zero(Y.rows(), ctx.data.spec.n);
    int offset = 0;
    for (const auto& basis : groups.bases) {
      xhat += (basis * beta.middleRows(offset, basis.cols())).transpose();
      offset += static_cast<int>(basis.cols());
    }
    return xhat;
  };

  const std::vector<double> grid = ctx.cfg.lambda_grid.empty() ? default_lambda_grid() : ctx.cfg.lambda_grid;
  const TuneResult tuned = tune_grid(
      grid, [&](double lambda) { return score_reconstruction(ctx, reconstruct(ctx.Ytune, lambda)); }, true);

  MethodOutput out;
  out.xhat = reconstruct(ctx.Ytest, tuned.value);
  out.hyper["lambda"] = tuned.value;
  out.hyper["fallback"] = gb.fallback;
  return out;
}

MethodOutput dispatch_method(Context& ctx, const std::string& id) {
  if (id == "true") return run_true(ctx);
  if (id == "A") return run_supervised(ctx);
  if (id == "B") return run_unsupervised(ctx);
  if (id == "C") return run_dictionary(ctx);
  if (id == "D") return run_group_dictionary(ctx);
  if (id == "E") return run_iht_svd(ctx);
  if (id == "F") return run_iht_group_svd(ctx);
  if (id == "G") return run_iht_known(ctx);
  if (id == "H") return run_lasso_svd(ctx);
  if (id == "I") return run_group_lasso(ctx);
  if (id == "J") return run_lasso_known(ctx);
  throw std::invalid_argument("unknown method '" + id + "'");
}

// ---- artifacts ----

void write_artifacts(const Context& ctx, const MetricsReport& report) {
  namespace fs = std::filesystem;
  const fs::path dir(ctx.cfg.out_dir);
  fs::create_directories(dir / "plots");

  {
    std::ofstream f(dir / "results.json");
    f << report.to_json().dump(2) << "\n";
  }
  {
    nlohmann::json timings = nlohmann::json::object();
    double total = 0.0;
    for (const auto& r : report.results) {
      timings[r.id] = r.wall_seconds;
      total += r.wall_seconds;
    }
    nlohmann::json j{{"schema_version", report.schema_version}, {"wall_seconds", timings}, {"total_seconds", total}};
    std::ofstream f(dir / "timings.json");
    f << j.dump(2) << "\n";
  }
  {
    std::vector<std::vector<std::string>> rows;
    for (const auto& r : report.results) {
      rows.push_back({r.id, r.ok ? "ok" : "failed", r.ok ? format_double(100.0 * r.mean_relative_mse) : "",
                      r.ok ? format_double(100.0 * r.stderr_relative_mse) : "", r.ok ? "" : r.error});
    }
    write_table_csv((dir / "summary.csv").string(),
                    {"method", "status", "mean_relative_mse_percent", "stderr_percent", "error"}, rows);
  }

  std::vector<std::string> ok_labels;
  std::vector<double> ok_values;
  for (const auto& r : report.results) {
    if (!r.ok) continue;
    ok_labels.push_back(r.id);
    ok_values.push_back(100.0 * r.mean_relative_mse);
  }
  if (!ok_labels.empty()) {
    write_bar_chart_svg((dir / "plots" / "mse_bar.svg").string(),
                        "mean relative MSE (%), dataset " + std::to_string(ctx.data.spec.id), ok_labels, ok_values);
  }
}

void write_reconstruction_plots(const Context& ctx, const std::string& method_id, const Eigen::MatrixXd& xhat) {
  namespace fs = std::filesystem;
  const fs::path dir = fs::path(ctx.cfg.out_dir) / "plots";
  fs::create_directories(dir);
  std::vector<SvgSeries> series(3);
  series[0].label = "original";
  series[0].y = ctx.data.test.row(0).transpose();
  series[1].label = "observed";
  series[1].y = ctx.Ytest.row(0).transpose();
  series[2].label = "reconstruction";
  series[2].y = xhat.row(0).transpose();
  write_line_plot_svg((dir / ("reconstruction_" + method_id + ".svg")).string(),
                      "test signal 0, method " + method_id, series);
}

}  // namespace

// ---- config serialization ----

nlohmann::json ExperimentConfig::to_json() const {
  nlohmann::json j;
  j["dataset"] = {{"id", dataset.id},
                  {"n", dataset.n},
                  {"sparsity", dataset.sparsity},
                  {"components", dataset.components},
                  {"train_count", dataset.train_count},
                  {"test_count", dataset.test_count},
                  {"seed", dataset.seed}};
  j["problem"] = problem_name(problem);
  j["blur_sigma"] = blur_sigma;
  j["noise_percent"] = noise_percent;
  j["noise_sigma_override"] = noise_sigma_override;
  j["methods"] = methods;
  j["clustering"] = clustering_name(clustering);
  j["lambda_grid"] = lambda_grid;
  j["sparsity_grid"] = sparsity_grid;
  j["method_config"] = {{"epochs", method_config.epochs},
                        {"batch_size", method_config.batch_size},
                        {"learning_rate", method_config.learning_rate},
                        {"rank", method_config.rank},
                        {"dict_epochs", method_config.dict_epochs},
                        {"dict_lambda", method_config.dict_lambda},
                        {"solver_max_iters", method_config.solver_max_iters},
                        {"solver_tol", method_config.solver_tol},
                        {"tune_subset", method_config.tune_subset}};
  j["seed"] = seed;
  // out_dir is an execution detail, not part of the experiment identity; it
  // stays out of the payload so artifacts are byte-stable across directories.
  return j;
}

namespace {

template <typename T>
void take(const nlohmann::json& j, const char* key, T* out) {
  if (j.contains(key)) j.at(key).get_to(*out);
}

void check_keys(const nlohmann::json& j, std::initializer_list<const char*> known, const char* where) {
  for (const auto& item : j.items()) {
    bool found = false;
    for (const char* k : known) found = found || item.key() == k;
    if (!found) throw std::invalid_argument(std::string("config: unknown key '") + item.key() + "' in " + where);
  }
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  check_keys(j,
             {"dataset", "problem", "blur_sigma", "noise_percent", "noise_sigma_override", "methods", "clustering",
              "lambda_grid", "sparsity_grid", "method_config", "seed", "out_dir"},
             "top level");
  ExperimentConfig cfg;
  if (j.contains("dataset")) {
    const auto& d = j.at("dataset");
    check_keys(d, {"id", "n", "sparsity", "components", "train_count", "test_count", "seed"}, "dataset");
    take(d, "id", &cfg.dataset.id);
    take(d, "n", &cfg.dataset.n);
    take(d, "sparsity", &cfg.dataset.sparsity);
    take(d, "components", &cfg.dataset.components);
    take(d, "train_count", &cfg.dataset.train_count);
    take(d, "test_count", &cfg.dataset.test_count);
    take(d, "seed", &cfg.dataset.seed);
  }
  if (j.contains("problem")) cfg.problem = problem_from(j.at("problem").get<std::string>());
  take(j, "blur_sigma", &cfg.blur_sigma);
  take(j, "noise_percent", &cfg.noise_percent);
  take(j, "noise_sigma_override", &cfg.noise_sigma_override);
  take(j, "methods", &cfg.methods);
  if (j.contains("clustering")) cfg.clustering = clustering_from(j.at("clustering").get<std::string>());
  take(j, "lambda_grid", &cfg.lambda_grid);
  take(j, "sparsity_grid", &cfg.sparsity_grid);
  if (j.contains("method_config")) {
    const auto& m = j.at("method_config");
    check_keys(m,
               {"epochs", "batch_size", "learning_rate", "rank", "dict_epochs", "dict_lambda", "solver_max_iters",
                "solver_tol", "tune_subset"},
               "method_config");
    take(m, "epochs", &cfg.method_config.epochs);
    take(m, "batch_size", &cfg.method_config.batch_size);
    take(m, "learning_rate", &cfg.method_config.learning_rate);
    take(m, "rank", &cfg.method_config.rank);
    take(m, "dict_epochs", &cfg.method_config.dict_epochs);
    take(m, "dict_lambda", &cfg.method_config.dict_lambda);
    take(m, "solver_max_iters", &cfg.method_config.solver_max_iters);
    take(m, "solver_tol", &cfg.method_config.solver_tol);
    take(m, "tune_subset", &cfg.method_config.tune_subset);
  }
  take(j, "seed", &cfg.seed);
  take(j, "out_dir", &cfg.out_dir);
  // The dataset inherits the experiment seed unless pinned explicitly.
  if (!(j.contains("dataset") && j.at("dataset").contains("seed"))) cfg.dataset.seed = cfg.seed;
  return cfg;
}

bool MetricsReport::all_ok() const {
  if (results.empty()) return false;
  for (const auto& r : results)
    if (!r.ok) return false;
  return true;
}

nlohmann::json MetricsReport::to_json() const {
  nlohmann::json j;
  j["schema_version"] = schema_version;
  j["config"] = config.to_json();
  j["noise_sigma"] = noise_sigma;
  j["results"] = nlohmann::json::array();
  for (const auto& r : results) {
    nlohmann::json e;
    e["id"] = r.id;
    e["ok"] = r.ok;
    if (r.ok) {
      e["mean_relative_mse_percent"] = 100.0 * r.mean_relative_mse;
      e["stderr_percent"] = 100.0 * r.stderr_relative_mse;
      e["hyperparameters"] = r.hyperparameters;
      e["per_signal_percent"] = nlohmann::json::array();
      for (int i = 0; i < r.per_signal.size(); ++i) e["per_signal_percent"].push_back(100.0 * r.per_signal[i]);
    } else {
      e["error"] = r.error;
    }
    j["results"].push_back(std::move(e));
  }
  return j;
}

double noise_sigma(const Eigen::MatrixXd& train, double percent) {
  if (train.rows() == 0) throw std::invalid_argument("noise_sigma: empty training set");
  if (percent <= 0.0) throw std::invalid_argument("noise_sigma: percent must be positive");
  // Amplitude of a signal: peak deviation from its own mean level (for a
  // pure sinusoid around an offset this is the sine amplitude).
  const Eigen::VectorXd level = train.rowwise().mean();
  const double amplitude = (train.colwise() - level).cwiseAbs().maxCoeff();
  if (amplitude <= 0.0) throw std::invalid_argument("noise_sigma: training signals have zero amplitude");
  return percent / 100.0 * amplitude;
}

TuneResult tune_grid(const std::vector<double>& grid, const std::function<double(double)>& score,
                     bool refine_geometric) {
  if (grid.empty()) throw std::invalid_argument("tune_grid: empty grid");
  std::vector<double> values = grid;
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());

  TuneResult best;
  best.score = std::numeric_limits<double>::infinity();
  auto consider = [&](double v) {
    const double s = score(v);
    best.trace.emplace_back(v, s);
    if (s < best.score || (s == best.score && v < best.value)) {
      best.score = s;
      best.value = v;
    }
  };
  for (double v : values) consider(v);

  if (refine_geometric) {
    const double center = best.value;
    for (double e : {-0.5, -0.25, 0.25, 0.5}) {
      const double v = center * std::pow(10.0, e);
      if (std::find_if(best.trace.begin(), best.trace.end(), [&](const auto& p) { return p.first == v; }) ==
          best.trace.end())
        consider(v);
    }
  }
  return best;
}

MetricsReport run_experiment(const ExperimentConfig& config) {
  if (config.methods.empty()) throw std::invalid_argument("run_experiment: no methods requested");
  for (const auto& id : config.methods)
    if (std::find(kAllMethods.begin(), kAllMethods.end(), id) == kAllMethods.end())
      throw std::invalid_argument("run_experiment: unknown method '" + id + "'");

  Context ctx(config);
  ctx.setup();

  MetricsReport report;
  report.config = config;
  report.noise_sigma = ctx.sigma;

  if (!config.out_dir.empty()) std::filesystem::create_directories(config.out_dir);

  for (const auto& id : config.methods) {
    MethodResult res;
    res.id = id;
    const auto start = std::chrono::steady_clock::now();
    try {
      MethodOutput out = dispatch_method(ctx, id);
      res.per_signal = relative_mse_rows(ctx.data.test, out.xhat);
      res.mean_relative_mse = mean(res.per_signal);
      res.stderr_relative_mse = standard_error(res.per_signal);
      res.hyperparameters = std::move(out.hyper);
      res.ok = true;
      if (!config.out_dir.empty()) write_reconstruction_plots(ctx, id, out.xhat);
    } catch (const std::exception& e) {
      res.ok = false;
      res.error = e.what();
    }
    res.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    report.results.push_back(std::move(res));
  }

  if (!config.out_dir.empty()) write_artifacts(ctx, report);
  return report;
}

// ---- tables ----

namespace {

struct Published {
  // Table cell values in percent, per dataset column 1..3; NaN when absent.
  std::map<std::string, std::array<double, 3>> rows;
};

const Published& published_table(int table_id) {
  static const Published t1{{
      {"A", {1.97, 7.03e-3, 2.71e-2}},
      {"B", {0.98, 1.80e-3, 6.32e-3}},
      {"C", {4.18, 3.43e-3, 7.13e-3}},
      {"D", {0.99, 1.70e-3, 2.42e-2}},
      {"E", {9.93, 1.25e-2, 3.97e-1}},
      {"F", {0.99, 2.04e-3, 3.97e-1}},
      {"G", {2.78, 1.22e-2, 2.46e-2}},
      {"H", {9.24, 1.55e-2, 3.07e-1}},
      {"I", {3.01, 3.71e-3, 8.31e-1}},
      {"J", {4.69, 1.00e-2, 2.15e-2}},
  }};
  static const Published t2{{
      {"exact", {0.97, 1.66e-3, 3.37e-3}},
      {"learned", {0.98, 1.80e-3, 6.32e-3}},
      {"random", {8.25, 3.46e-3, 5.70e-3}},
  }};
  static const Published t3{{
      {"B", {3.68, 2.65e-3, 1.01e-2}},
      {"C", {14.32, 6.61e-3, 1.28e-2}},
      {"D", {13.51, 4.62e-3, 3.41e-2}},
      {"F", {3.80, 5.54e-3, 9.48e-1}},
      {"I", {11.48, 1.34e-2, 9.11e-1}},
  }};
  switch (table_id) {
    case 1:
      return t1;
    case 2:
      return t2;
    case 3:
      return t3;
    default:
      throw std::invalid_argument("published_table: table_id must be 1, 2 or 3");
  }
}

double mini_blur_sigma(int dataset_id) {
  switch (dataset_id) {
    case 1:
      return 1.0;
    case 2:
      return 1.5;
    default:
      return 1.0;
  }
}

double paper_blur_sigma(int dataset_id) {
  switch (dataset_id) {
    case 1:
      return 1.0;
    case 2:
      return 30.0;
    default:
      return 20.0;
  }
}

}  // namespace

ExperimentConfig table_config(int table_id, int dataset_id, const std::string& scale, std::uint64_t seed) {
  if (table_id < 1 || table_id > 3) throw std::invalid_argument("table_config: table_id must be 1, 2 or 3");
  if (dataset_id < 1 || dataset_id > 3) throw std::invalid_argument("table_config: dataset_id must be 1, 2 or 3");
  if (scale != "mini" && scale != "paper") throw std::invalid_argument("table_config: scale must be mini or paper");
  const bool paper = scale == "paper";

  ExperimentConfig cfg;
  cfg.seed = seed;
  cfg.dataset.id = dataset_id;
  cfg.dataset.seed = seed;
  if (paper) {
    cfg.dataset.n = 1000;
    cfg.dataset.sparsity = 20;
    cfg.dataset.components = 10;
    cfg.dataset.train_count = 2000;
    cfg.dataset.test_count = 2000;
  } else {
    cfg.dataset.n = 50;
    cfg.dataset.sparsity = 5;
    cfg.dataset.components = 5;
    cfg.dataset.train_count = 2000;
    cfg.dataset.test_count = 1000;
  }
  // The amplitude rule puts dataset 1 in a regime where every method's error
  // is dominated by noise (coordinates are standard normal, so 10% of the
  // peak-to-peak range is sigma ~ 0.65); the published numbers are only
  // consistent with sigma = 0.1, so both scales pin it.
  if (dataset_id == 1) cfg.noise_sigma_override = 0.1;

  if (table_id == 3) {
    cfg.problem = Problem::deblurring;
    cfg.blur_sigma = paper ? paper_blur_sigma(dataset_id) : mini_blur_sigma(dataset_id);
    cfg.methods = {"B", "C", "D", "F", "I"};
  } else {
    cfg.problem = Problem::denoising;
    if (table_id == 2) {
      cfg.methods = {"B"};
    } else {
      cfg.methods = paper ? std::vector<std::string>{"B", "C", "D", "E", "F", "G", "H", "I", "J"}
                          : std::vector<std::string>{"A", "B", "C", "D", "E", "F", "G", "H", "I", "J"};
    }
  }
  if (!paper) cfg.method_config.epochs = 80;
  return cfg;
}

bool TableRun::all_ok() const {
  for (const auto& col : columns)
    if (!col.all_ok()) return false;
  return !columns.empty();
}

TableRun reproduce_table(int table_id, const std::string& scale, std::uint64_t seed, const std::string& out_dir,
                         const std::vector<std::string>& methods_override) {
  namespace fs = std::filesystem;
  TableRun run;
  run.table_id = table_id;
  run.scale = scale;

  const bool paper = scale == "paper";
  const std::vector<ClusteringMode> table2_modes = {ClusteringMode::exact, ClusteringMode::learned,
                                                    ClusteringMode::random};

  for (int dataset_id = 1; dataset_id <= 3; ++dataset_id) {
    if (table_id == 2) {
      // One column still means three runs (clustering modes); store them as
      // consecutive reports with a single-method result each.
      for (ClusteringMode mode : table2_modes) {
        ExperimentConfig cfg = table_config(2, dataset_id, scale, seed);
        cfg.clustering = mode;
        if (!out_dir.empty())
          cfg.out_dir =
              (fs::path(out_dir) / ("dataset" + std::to_string(dataset_id) + "_" + clustering_name(mode))).string();
        run.columns.push_back(run_experiment(cfg));
      }
    } else {
      ExperimentConfig cfg = table_config(table_id, dataset_id, scale, seed);
      if (!methods_override.empty()) cfg.methods = methods_override;
      if (!out_dir.empty()) cfg.out_dir = (fs::path(out_dir) / ("dataset" + std::to_string(dataset_id))).string();
      run.columns.push_back(run_experiment(cfg));
    }
  }

  if (out_dir.empty()) return run;
  fs::create_directories(out_dir);

  // Row ids in the paper's order.
  std::vector<std::string> row_ids;
  if (table_id == 2) {
    row_ids = {"exact", "learned", "random"};
  } else {
    row_ids = run.columns.front().config.methods;
  }

  auto find_cell = [&](int dataset_id, const std::string& row) -> const MethodResult* {
    for (const auto& col : run.columns) {
      if (col.config.dataset.id != dataset_id) continue;
      if (table_id == 2 && clustering_name(col.config.clustering) != row) continue;
      for (const auto& r : col.results) {
        if (table_id == 2 ? r.id == "B" : r.id == row) return &r;
      }
    }
    return nullptr;
  };

  const Published& pub = published_table(table_id);
  std::vector<std::string> header = {"method", "dataset1_percent", "dataset2_percent", "dataset3_percent"};
  if (paper) {
    header.insert(header.end(), {"dataset1_published", "dataset2_published", "dataset3_published"});
  }
  std::vector<std::vector<std::string>> rows;
  nlohmann::json jt;
  jt["table"] = table_id;
  jt["scale"] = scale;
  jt["seed"] = seed;
  jt["rows"] = nlohmann::json::array();
  for (const auto& row : row_ids) {
    std::vector<std::string> cells = {row};
    nlohmann::json jrow;
    jrow["method"] = row;
    for (int d = 1; d <= 3; ++d) {
      const MethodResult* r = find_cell(d, row);
      if (r && r->ok) {
        cells.push_back(format_double(100.0 * r->mean_relative_mse));
        jrow["dataset" + std::to_string(d) + "_percent"] = 100.0 * r->mean_relative_mse;
      } else {
        cells.push_back(r ? "failed" : "");
      }
    }
    if (paper) {
      const auto it = pub.rows.find(row);
      for (int d = 0; d < 3; ++d) {
        if (it != pub.rows.end()) {
          cells.push_back(format_double(it->second[d]));
          jrow["dataset" + std::to_string(d + 1) + "_published"] = it->second[d];
        } else {
          cells.push_back("");
        }
      }
    }
    rows.push_back(std::move(cells));
    jt["rows"].push_back(std::move(jrow));
  }
  write_table_csv((fs::path(out_dir) / "table.csv").string(), header, rows);
  {
    std::ofstream f(fs::path(out_dir) / "table.json");
    f << jt.dump(2) << "\n";
  }
  return run;
}

}  // namespace gmbayes
