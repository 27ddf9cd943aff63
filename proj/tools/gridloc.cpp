// gridloc: RSS grid-localization workbench.
//
// Verbs: gen-data, train-dqn, train-fingerprint, eval, report.
// Exit codes: 0 success, 2 config error, 3 data error, 4 numerical failure.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gridloc/commands.hpp"
#include "gridloc/errors.hpp"

namespace fs = std::filesystem;

int main(int argc, char** argv) {
  CLI::App app{"RSS grid-localization workbench"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = ".";
  std::string data_path;
  std::string model_path;
  std::string method_name = "dqn";
  std::vector<std::string> metrics_paths;
  std::uint64_t seed_override = 0;
  bool seed_given = false;

  auto add_common = [&](CLI::App* cmd, bool needs_config) {
    auto* cfg_opt = cmd->add_option("--config", config_path, "experiment config (JSON)");
    if (needs_config) cfg_opt->required();
    cmd->add_option("--out", out_dir, "output directory");
    cmd->add_option_function<std::uint64_t>(
        "--seed",
        [&](std::uint64_t v) {
          seed_override = v;
          seed_given = true;
        },
        "master seed override");
  };

  auto* gen = app.add_subcommand("gen-data", "generate sample pools and trajectories");
  add_common(gen, true);

  auto* train = app.add_subcommand("train-dqn", "train the Q-network on a dataset");
  add_common(train, true);
  train->add_option("--data", data_path, "dataset file")->required();

  auto* train_fp = app.add_subcommand("train-fingerprint",
                                      "train the supervised fingerprint classifier");
  add_common(train_fp, true);
  train_fp->add_option("--data", data_path, "dataset file")->required();

  auto* eval = app.add_subcommand("eval", "evaluate a method on the test trajectories");
  add_common(eval, true);
  eval->add_option("--data", data_path, "dataset file")->required();
  eval->add_option("--model", model_path, "weights file (dqn / fingerprint)");
  eval->add_option("--method", method_name, "dqn | mlat | fingerprint");

  auto* report = app.add_subcommand("report", "merge stats files into comparison tables");
  report->add_option("--metrics", metrics_paths, "stats JSON files")->required();
  report->add_option("--out", out_dir, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (report->parsed()) {
      std::vector<fs::path> paths(metrics_paths.begin(), metrics_paths.end());
      gridloc::run_report(paths, out_dir);
      std::cout << "report written to " << out_dir << "\n";
      return 0;
    }

    gridloc::ExperimentConfig cfg = gridloc::load_config(config_path);
    if (seed_given) cfg.master_seed = seed_override;
    gridloc::validate_config(cfg);

    if (gen->parsed()) {
      gridloc::run_gen_data(cfg, out_dir);
      std::cout << "dataset written to " << out_dir << "\n";
    } else if (train->parsed()) {
      gridloc::run_train_dqn(cfg, data_path, out_dir);
      std::cout << "weights and training log written to " << out_dir << "\n";
    } else if (train_fp->parsed()) {
      gridloc::run_train_fingerprint(cfg, data_path, out_dir);
      std::cout << "fingerprint model written to " << out_dir << "\n";
    } else if (eval->parsed()) {
      const auto method = gridloc::parse_eval_method(method_name);
      if (method != gridloc::EvalMethod::Mlat && model_path.empty())
        throw gridloc::ConfigError("--model is required for method " +
                                   method_name);
      gridloc::run_eval(cfg, method, model_path, data_path, out_dir);
      std::cout << "metrics written to " << out_dir << "\n";
    }
    return 0;
  } catch (const gridloc::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const gridloc::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const gridloc::NumericError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
