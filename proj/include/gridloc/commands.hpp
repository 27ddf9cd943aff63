#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "gridloc/config.hpp"

namespace gridloc {

enum class EvalMethod {
  Dqn,
  Mlat,
  Fingerprint,
};

const char* eval_method_name(EvalMethod m);
EvalMethod parse_eval_method(const std::string& name);  // throws ConfigError

// Each command validates its inputs, writes its artifacts under out_dir,
// and drops a <command>.manifest.json recording the config snapshot, the
// artifact paths with their format versions, the wall-clock duration, and
// headline metrics. All outputs except the manifest are byte-identical
// across reruns with the same master seed.

// Writes dataset.bin: sample pools plus train/test trajectories.
void run_gen_data(const ExperimentConfig& cfg,
                  const std::filesystem::path& out_dir);

// Writes dqn_weights.bin, train_log.csv (step,loss,reward,epsilon per SGD
// update), and episode_returns.csv.
void run_train_dqn(const ExperimentConfig& cfg,
                   const std::filesystem::path& dataset_path,
                   const std::filesystem::path& out_dir);

// Writes fingerprint_weights.bin and fingerprint_report.json.
void run_train_fingerprint(const ExperimentConfig& cfg,
                           const std::filesystem::path& dataset_path,
                           const std::filesystem::path& out_dir);

// Runs the selected method over the test trajectories and writes
// <method>_stats.json and <method>_cdf.csv. model_path is ignored for the
// multilateration method.
void run_eval(const ExperimentConfig& cfg, EvalMethod method,
              const std::filesystem::path& model_path,
              const std::filesystem::path& dataset_path,
              const std::filesystem::path& out_dir);

// Merges stats files into report_table.csv and report_compare.csv and emits
// a two-column gnuplot .dat per method from the referenced CDF files.
void run_report(const std::vector<std::filesystem::path>& stats_files,
                const std::filesystem::path& out_dir);

}  // namespace gridloc
