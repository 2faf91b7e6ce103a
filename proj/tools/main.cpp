#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "gmbayes/datasets.hpp"
#include "gmbayes/experiment.hpp"
#include "gmbayes/model_io.hpp"
#include "gmbayes/signal_io.hpp"

namespace {

using gmbayes::ExperimentConfig;

nlohmann::json load_json(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open config file " + path);
  return nlohmann::json::parse(f);
}

// Precedence: defaults < config file < --scale preset < explicit flags.
struct CommonArgs {
  std::string config_path;
  std::string scale;
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::string out;

  void attach(CLI::App* sub, bool out_required) {
    sub->add_option("--config", config_path, "experiment config (JSON)")->check(CLI::ExistingFile);
    sub->add_option("--scale", scale, "dataset size preset")->check(CLI::IsMember({"mini", "paper"}));
    auto* s = sub->add_option("--seed", seed, "master seed (also the dataset seed)");
    sub->callback([this, s] { seed_given = s->count() > 0; });
    auto* o = sub->add_option("--out", out, "output directory");
    if (out_required) o->required();
  }

  ExperimentConfig resolve() const {
    ExperimentConfig cfg;
    if (!config_path.empty()) cfg = ExperimentConfig::from_json(load_json(config_path));
    if (!scale.empty()) {
      if (scale == "paper") {
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
    }
    if (seed_given) {
      cfg.seed = seed;
      cfg.dataset.seed = seed;
    }
    if (!out.empty()) cfg.out_dir = out;
    return cfg;
  }
};

void print_report(const gmbayes::MetricsReport& report) {
  std::cout << "noise sigma: " << gmbayes::format_double(report.noise_sigma) << "\n";
  for (const auto& r : report.results) {
    if (r.ok) {
      std::cout << "  " << r.id << "  ok      " << gmbayes::format_double(100.0 * r.mean_relative_mse) << "% +/- "
                << gmbayes::format_double(100.0 * r.stderr_relative_mse) << "%  ("
                << gmbayes::format_double(r.wall_seconds) << " s)\n";
    } else {
      std::cout << "  " << r.id << "  failed  " << r.error << "\n";
    }
  }
}

int run_methods(const CommonArgs& args, std::vector<std::string> methods_override) {
  ExperimentConfig cfg = args.resolve();
  if (!methods_override.empty()) cfg.methods = std::move(methods_override);
  if (cfg.methods.empty()) cfg.methods = {"A", "B", "C", "D", "E", "F", "G", "H", "I", "J"};
  const gmbayes::MetricsReport report = gmbayes::run_experiment(cfg);
  print_report(report);
  return report.all_ok() ? 0 : 1;
}

int run_gen_data(const CommonArgs& args, int dataset_id) {
  namespace fs = std::filesystem;
  ExperimentConfig cfg = args.resolve();
  if (dataset_id > 0) cfg.dataset.id = dataset_id;
  const gmbayes::Dataset data = gmbayes::generate_dataset(cfg.dataset);

  const fs::path dir(args.out);
  fs::create_directories(dir);
  gmbayes::write_signals_csv((dir / "train.csv").string(), data.train);
  gmbayes::write_signals_csv((dir / "test.csv").string(), data.test);
  gmbayes::write_labels_csv((dir / "train_labels.csv").string(), data.train_labels);
  gmbayes::write_labels_csv((dir / "test_labels.csv").string(), data.test_labels);

  const int block = 1 << 5;
  nlohmann::json meta;
  meta["spec"] = {{"id", data.spec.id},
                  {"n", data.spec.n},
                  {"sparsity", data.spec.sparsity},
                  {"components", data.spec.components},
                  {"train_count", data.spec.train_count},
                  {"test_count", data.spec.test_count},
                  {"seed", data.spec.seed}};
  meta["num_classes"] = data.num_classes;
  meta["has_true_model"] = data.has_true_model;
  meta["wavelet"] = {{"family", "db6"},
                     {"levels", 5},
                     {"padded_length", ((data.spec.n + block - 1) / block) * block}};
  meta["files"] = {{"train", "train.csv"},
                   {"test", "test.csv"},
                   {"train_labels", "train_labels.csv"},
                   {"test_labels", "test_labels.csv"}};
  if (data.has_true_model) {
    gmbayes::save_model((dir / "true_model.gmxb").string(), data.true_model);
    meta["files"]["true_model"] = "true_model.gmxb";
  }
  std::ofstream f(dir / "dataset.json");
  f << meta.dump(2) << "\n";

  std::cout << "dataset " << data.spec.id << ": " << data.train.rows() << " train / " << data.test.rows()
            << " test signals of length " << data.spec.n << " -> " << args.out << "\n";
  return 0;
}

int run_table(const CommonArgs& args, int table_id, const std::string& methods_csv) {
  std::vector<std::string> methods;
  if (!methods_csv.empty()) {
    std::string item;
    std::istringstream stream(methods_csv);
    while (std::getline(stream, item, ',')) {
      if (!item.empty()) methods.push_back(item);
    }
  }
  const std::string scale = args.scale.empty() ? "mini" : args.scale;
  const gmbayes::TableRun run = gmbayes::reproduce_table(table_id, scale, args.seed, args.out, methods);
  for (const auto& col : run.columns) {
    std::cout << "dataset " << col.config.dataset.id;
    if (run.table_id == 2) {
      const char* mode = col.config.clustering == gmbayes::ClusteringMode::exact      ? "exact"
                         : col.config.clustering == gmbayes::ClusteringMode::learned ? "learned"
                                                                                     : "random";
      std::cout << " (" << mode << ")";
    }
    std::cout << "\n";
    print_report(col);
  }
  return run.all_ok() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayes-optimal estimation under Gaussian mixture priors: data, training, baselines, tables"};
  app.set_version_flag("--version", "gmbayes 0.1.0");
  app.require_subcommand(1);

  CommonArgs gen_args, fit_args, train_args, base_args, exp_args, table_args;
  int dataset_id = 0;
  std::vector<std::string> baseline_methods;
  int table_id = 1;
  std::string table_methods;

  auto* gen = app.add_subcommand("gen-data", "generate a dataset and write CSV + metadata");
  gen_args.attach(gen, true);
  gen->add_option("--dataset", dataset_id, "dataset id (1, 2 or 3)")->check(CLI::Range(1, 3));

  auto* fit = app.add_subcommand("fit-unsupervised", "cluster, estimate mixture parameters, evaluate (method B)");
  fit_args.attach(fit, false);

  auto* trn = app.add_subcommand("train-supervised", "gradient-train the estimator, evaluate (method A)");
  train_args.attach(trn, false);

  auto* base = app.add_subcommand("run-baseline", "run classical baselines (methods C..J)");
  base_args.attach(base, false);
  base->add_option("--method", baseline_methods, "baseline id, repeatable (C..J)")
      ->required()
      ->check(CLI::IsMember({"C", "D", "E", "F", "G", "H", "I", "J"}));

  auto* exp = app.add_subcommand("run-experiment", "run every method requested in the config");
  exp_args.attach(exp, false);

  auto* tab = app.add_subcommand("reproduce-table", "reproduce a results table across all three datasets");
  table_args.attach(tab, true);
  tab->add_option("--table", table_id, "table id (1 denoising, 2 clustering ablation, 3 deblurring)")
      ->required()
      ->check(CLI::Range(1, 3));
  tab->add_option("--methods", table_methods, "comma-separated method override (tables 1 and 3)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return run_gen_data(gen_args, dataset_id);
    if (fit->parsed()) return run_methods(fit_args, {"B"});
    if (trn->parsed()) return run_methods(train_args, {"A"});
    if (base->parsed()) return run_methods(base_args, baseline_methods);
    if (exp->parsed()) return run_methods(exp_args, {});
    if (tab->parsed()) return run_table(table_args, table_id, table_methods);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
