#include "gridloc/commands.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>

#include <json.hpp>

#include "gridloc/baselines.hpp"
#include "gridloc/dataset.hpp"
#include "gridloc/dqn.hpp"
#include "gridloc/errors.hpp"
#include "gridloc/metrics.hpp"
#include "gridloc/model_io.hpp"

namespace gridloc {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_ =
      std::chrono::steady_clock::now();
};

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_text_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << content;
  if (!out) throw DataError("write failed for " + path.string());
}

void write_manifest(const fs::path& out_dir, const std::string& command,
                    const ExperimentConfig& cfg, const json& artifacts,
                    double duration_s, const json& metrics) {
  json manifest;
  manifest["command"] = command;
  manifest["config"] = config_to_json(cfg);
  manifest["config_hash"] = config_hash(cfg);
  manifest["artifacts"] = artifacts;
  manifest["duration_seconds"] = duration_s;
  manifest["metrics"] = metrics;
  write_text_file(out_dir / (command + ".manifest.json"),
                  manifest.dump(2) + "\n");
}

void check_dataset_matches_config(const ExperimentConfig& cfg,
                                  const Dataset& ds) {
  const auto shape = [](int r, int c) {
    return std::to_string(r) + "x" + std::to_string(c);
  };
  if (ds.map.rows() != cfg.grid.rows || ds.map.cols() != cfg.grid.cols)
    throw DataError("config grid " + shape(cfg.grid.rows, cfg.grid.cols) +
                    " does not match dataset grid " +
                    shape(ds.map.rows(), ds.map.cols()));
  const auto cfg_gws =
      static_cast<std::size_t>(cfg.gateways.rows) * cfg.gateways.cols;
  if (ds.gateways.size() != cfg_gws)
    throw DataError("config deploys " + std::to_string(cfg_gws) +
                    " gateways but dataset has " +
                    std::to_string(ds.gateways.size()));
}

json stats_to_json(const ErrorStats& s) {
  return {{"mean_m", s.mean},
          {"rms_m", s.rms},
          {"q80_m", s.q80},
          {"q95_m", s.q95},
          {"count", s.count}};
}

ErrorStats stats_from_json(const json& j) {
  ErrorStats s;
  s.mean = j.at("mean_m").get<double>();
  s.rms = j.at("rms_m").get<double>();
  s.q80 = j.at("q80_m").get<double>();
  s.q95 = j.at("q95_m").get<double>();
  s.count = j.at("count").get<std::size_t>();
  return s;
}

}  // namespace

const char* eval_method_name(EvalMethod m) {
  switch (m) {
    case EvalMethod::Dqn:
      return "dqn";
    case EvalMethod::Mlat:
      return "mlat";
    case EvalMethod::Fingerprint:
      return "fingerprint";
  }
  return "?";
}

EvalMethod parse_eval_method(const std::string& name) {
  if (name == "dqn") return EvalMethod::Dqn;
  if (name == "mlat") return EvalMethod::Mlat;
  if (name == "fingerprint") return EvalMethod::Fingerprint;
  throw ConfigError("unknown method '" + name +
                    "' (expected dqn, mlat, or fingerprint)");
}

void run_gen_data(const ExperimentConfig& cfg, const fs::path& out_dir) {
  validate_config(cfg);
  Stopwatch watch;
  fs::create_directories(out_dir);

  const GridMap map = make_grid(cfg);
  const std::vector<Gateway> gws = make_gateways(cfg);

  const std::uint64_t data_seed = derive_seed(*cfg.master_seed, seed_stage::kData);
  Rng params_rng(derive_seed(data_seed, 0));
  const std::vector<PathLossParams> params =
      cfg.radio.perturb_per_gateway
          ? perturbed_params(gws.size(), cfg.radio.exponent_min,
                             cfg.radio.exponent_max, cfg.radio.ref_rss_min_dbm,
                             cfg.radio.ref_rss_max_dbm, params_rng)
          : std::vector<PathLossParams>(
                gws.size(), {cfg.radio.exponent, cfg.radio.ref_rss_dbm});

  Rng db_rng(derive_seed(data_seed, 1));
  const NoiseModel noise{cfg.radio.noise_sigma_db};
  RssDatabase db =
      build_rss_database(map, gws, params, noise, cfg.radio.sensitivity_floor_dbm,
                         cfg.dataset.samples_per_pool, db_rng);

  Dataset ds{map,
             gws,
             params,
             cfg.radio.noise_sigma_db,
             cfg.radio.sensitivity_floor_dbm,
             *cfg.master_seed,
             std::move(db),
             {},
             {}};
  ds.train.reserve(cfg.dataset.train_trajectories);
  for (std::uint32_t i = 0; i < cfg.dataset.train_trajectories; ++i)
    ds.train.push_back(generate_trajectory(map, ds.db, cfg.dataset.trajectory_steps,
                                           derive_seed(data_seed, 2 + i)));
  ds.test.reserve(cfg.dataset.test_trajectories);
  for (std::uint32_t i = 0; i < cfg.dataset.test_trajectories; ++i)
    ds.test.push_back(generate_trajectory(
        map, ds.db, cfg.dataset.trajectory_steps,
        derive_seed(data_seed, 2 + cfg.dataset.train_trajectories + i)));

  const fs::path dataset_path = out_dir / "dataset.bin";
  write_dataset(ds, dataset_path);

  write_manifest(out_dir, "gen-data", cfg,
                 {{"dataset", {{"path", dataset_path.filename().string()},
                               {"format_version", kDatasetFormatVersion}}}},
                 watch.seconds(),
                 {{"train_trajectories", ds.train.size()},
                  {"test_trajectories", ds.test.size()},
                  {"trajectory_steps", cfg.dataset.trajectory_steps},
                  {"cells", map.cell_count()},
                  {"gateways", gws.size()}});
}

void run_train_dqn(const ExperimentConfig& cfg, const fs::path& dataset_path,
                   const fs::path& out_dir) {
  validate_config(cfg);
  Stopwatch watch;
  fs::create_directories(out_dir);

  const Dataset ds = read_dataset(dataset_path);
  check_dataset_matches_config(cfg, ds);

  const FeatureConfig features = make_feature_config(cfg);
  const DqnTrainResult result = [&] {
    try {
      return train_dqn(ds.train, ds.map, ds.gateways, cfg.reward, features,
                       cfg.dqn, derive_seed(*cfg.master_seed, seed_stage::kNetInit),
                       derive_seed(*cfg.master_seed, seed_stage::kTraining));
    } catch (const std::runtime_error& e) {
      throw NumericError(e.what());
    }
  }();

  const fs::path weights_path = out_dir / "dqn_weights.bin";
  write_model(result.pair.q_net,
              {ModelKind::QNetwork, ds.map.rows(), ds.map.cols(), features},
              weights_path);

  std::string log_text;
  log_text.reserve(result.log.updates.size() * 48);
  for (const TrainingStepRecord& rec : result.log.updates)
    log_text += std::to_string(rec.step) + "," + format_double(rec.loss) + "," +
                format_double(rec.reward) + "," + format_double(rec.epsilon) +
                "\n";
  write_text_file(out_dir / "train_log.csv", log_text);

  std::string returns_text;
  for (std::size_t i = 0; i < result.log.episode_returns.size(); ++i)
    returns_text += std::to_string(i) + "," +
                    format_double(result.log.episode_returns[i]) + "\n";
  write_text_file(out_dir / "episode_returns.csv", returns_text);

  const double final_loss =
      result.log.updates.empty() ? 0.0 : result.log.updates.back().loss;
  write_manifest(out_dir, "train-dqn", cfg,
                 {{"weights", {{"path", weights_path.filename().string()},
                               {"format_version", kModelFormatVersion}}},
                  {"train_log", {{"path", "train_log.csv"}}},
                  {"episode_returns", {{"path", "episode_returns.csv"}}}},
                 watch.seconds(),
                 {{"sgd_updates", result.log.updates.size()},
                  {"episodes", result.log.episode_returns.size()},
                  {"final_loss", final_loss}});
}

void run_train_fingerprint(const ExperimentConfig& cfg,
                           const fs::path& dataset_path,
                           const fs::path& out_dir) {
  validate_config(cfg);
  Stopwatch watch;
  fs::create_directories(out_dir);

  const Dataset ds = read_dataset(dataset_path);
  check_dataset_matches_config(cfg, ds);

  // Supervised pairs: every step of every training trajectory.
  std::vector<LabeledRss> labeled;
  for (const Trajectory& traj : ds.train)
    for (std::size_t t = 0; t < traj.rss_seq.size(); ++t)
      labeled.push_back({traj.rss_seq[t], traj.true_cells[t]});

  const FeatureConfig features = make_feature_config(cfg);
  const FingerprintTrainResult result = [&] {
    try {
      return train_fingerprint(labeled, ds.map, features, cfg.fingerprint,
                               derive_seed(*cfg.master_seed,
                                           seed_stage::kFingerprint));
    } catch (const std::runtime_error& e) {
      throw NumericError(e.what());
    }
  }();

  const fs::path weights_path = out_dir / "fingerprint_weights.bin";
  write_model(result.model.net,
              {ModelKind::FingerprintClassifier, ds.map.rows(), ds.map.cols(),
               features},
              weights_path);

  const json report = {{"holdout_accuracy", result.report.holdout_accuracy},
                       {"final_epoch_loss", result.report.final_epoch_loss},
                       {"train_samples", result.report.train_samples},
                       {"holdout_samples", result.report.holdout_samples}};
  write_text_file(out_dir / "fingerprint_report.json", report.dump(2) + "\n");

  write_manifest(out_dir, "train-fingerprint", cfg,
                 {{"weights", {{"path", weights_path.filename().string()},
                               {"format_version", kModelFormatVersion}}},
                  {"report", {{"path", "fingerprint_report.json"}}}},
                 watch.seconds(), report);
}

void run_eval(const ExperimentConfig& cfg, EvalMethod method,
              const fs::path& model_path, const fs::path& dataset_path,
              const fs::path& out_dir) {
  validate_config(cfg);
  Stopwatch watch;
  fs::create_directories(out_dir);

  const Dataset ds = read_dataset(dataset_path);
  check_dataset_matches_config(cfg, ds);
  if (ds.test.empty()) throw DataError("dataset holds no test trajectories");

  std::size_t failed_fixes = 0;
  ErrorSeries errors;

  if (method == EvalMethod::Dqn) {
    auto [net, header] = read_model(model_path);
    if (header.kind != ModelKind::QNetwork)
      throw DataError("model file is not a Q-network");
    if (header.grid_rows != ds.map.rows() || header.grid_cols != ds.map.cols())
      throw DataError("model grid " + std::to_string(header.grid_rows) + "x" +
                      std::to_string(header.grid_cols) +
                      " does not match dataset grid " +
                      std::to_string(ds.map.rows()) + "x" +
                      std::to_string(ds.map.cols()));
    QNetworkPair pair{std::move(net), Mlp(), 0};
    const CellIndex initial =
        ds.map.cell(cfg.eval.initial_row, cfg.eval.initial_col);
    for (const Trajectory& traj : ds.test) {
      const auto estimates = localize_trajectory(pair, traj.rss_seq, ds.map,
                                                 header.features, initial);
      const auto traj_errors = error_series(estimates, traj.true_cells, ds.map);
      errors.insert(errors.end(), traj_errors.begin(), traj_errors.end());
    }
  } else if (method == EvalMethod::Mlat) {
    for (const Trajectory& traj : ds.test) {
      // Snapshot fixes; a step without a usable fix carries the last one
      // forward (grid center before any fix exists).
      CellIndex estimate = ds.map.nearest_cell(
          {ds.map.origin().x + ds.map.cols() * ds.map.cell_size() / 2.0,
           ds.map.origin().y + ds.map.rows() * ds.map.cell_size() / 2.0});
      std::vector<CellIndex> estimates;
      estimates.reserve(traj.rss_seq.size());
      for (const RssVector& rss : traj.rss_seq) {
        try {
          estimate = ds.map.nearest_cell(multilaterate(rss, ds.gateways, cfg.mlat));
        } catch (const std::runtime_error&) {
          ++failed_fixes;
        }
        estimates.push_back(estimate);
      }
      const auto traj_errors = error_series(estimates, traj.true_cells, ds.map);
      errors.insert(errors.end(), traj_errors.begin(), traj_errors.end());
    }
  } else {
    auto [net, header] = read_model(model_path);
    if (header.kind != ModelKind::FingerprintClassifier)
      throw DataError("model file is not a fingerprint classifier");
    FingerprintModel model{std::move(net), header.features, header.grid_rows,
                           header.grid_cols};
    for (const Trajectory& traj : ds.test) {
      std::vector<CellIndex> estimates;
      estimates.reserve(traj.rss_seq.size());
      for (const RssVector& rss : traj.rss_seq)
        estimates.push_back(predict_fingerprint(model, rss, ds.map));
      const auto traj_errors = error_series(estimates, traj.true_cells, ds.map);
      errors.insert(errors.end(), traj_errors.begin(), traj_errors.end());
    }
  }

  const ErrorStats series_stats = stats(errors);
  const CdfCurve curve = cdf(errors);
  const std::string name = eval_method_name(method);

  std::string cdf_text = "error_m,cum_fraction\n";
  for (const CdfPoint& p : curve)
    cdf_text += format_double(p.error_m) + "," + format_double(p.fraction) + "\n";
  const fs::path cdf_path = out_dir / (name + "_cdf.csv");
  write_text_file(cdf_path, cdf_text);

  json stats_json;
  stats_json["method"] = name;
  stats_json["config_hash"] = config_hash(cfg);
  stats_json["stats"] = stats_to_json(series_stats);
  stats_json["cdf_csv"] = cdf_path.filename().string();
  if (method == EvalMethod::Mlat) stats_json["failed_fixes"] = failed_fixes;
  const fs::path stats_path = out_dir / (name + "_stats.json");
  write_text_file(stats_path, stats_json.dump(2) + "\n");

  write_manifest(out_dir, "eval-" + name, cfg,
                 {{"stats", {{"path", stats_path.filename().string()}}},
                  {"cdf", {{"path", cdf_path.filename().string()}}}},
                 watch.seconds(), stats_json);
}

void run_report(const std::vector<fs::path>& stats_files,
                const fs::path& out_dir) {
  if (stats_files.empty()) throw DataError("report needs at least one stats file");
  fs::create_directories(out_dir);

  std::vector<MethodStats> runs;
  std::string table = "method,mean_m,rms_m,q80_m,q95_m,count\n";
  for (const fs::path& path : stats_files) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open stats file " + path.string());
    json j;
    try {
      in >> j;
    } catch (const json::exception& e) {
      throw DataError("stats parse error in " + path.string() + ": " + e.what());
    }
    const std::string name = j.at("method").get<std::string>();
    const ErrorStats s = stats_from_json(j.at("stats"));
    runs.push_back({name, s});
    table += name + "," + format_double(s.mean) + "," + format_double(s.rms) +
             "," + format_double(s.q80) + "," + format_double(s.q95) + "," +
             std::to_string(s.count) + "\n";

    // Re-emit the referenced CDF as a two-column gnuplot file.
    if (j.contains("cdf_csv")) {
      const fs::path cdf_path = path.parent_path() / j.at("cdf_csv").get<std::string>();
      std::ifstream cdf_in(cdf_path);
      if (cdf_in) {
        std::string dat;
        std::string line;
        std::getline(cdf_in, line);  // header
        while (std::getline(cdf_in, line)) {
          const auto comma = line.find(',');
          if (comma == std::string::npos) continue;
          dat += line.substr(0, comma) + " " + line.substr(comma + 1) + "\n";
        }
        write_text_file(out_dir / (name + "_cdf.dat"), dat);
      }
    }
  }
  write_text_file(out_dir / "report_table.csv", table);

  if (runs.size() >= 2) {
    const ComparisonReport comparison = compare(runs);
    std::string pairs = "method_a,method_b,rms_reduction_pct,q95_reduction_pct\n";
    for (const PairwiseDifference& p : comparison.pairs)
      pairs += p.a + "," + p.b + "," + format_double(p.rms_reduction_pct) +
               "," + format_double(p.q95_reduction_pct) + "\n";
    std::string ranking;
    for (const std::string& name : comparison.ranking)
      ranking += (ranking.empty() ? "" : " < ") + name;
    pairs += "# ranking by rms: " + ranking + "\n";
    write_text_file(out_dir / "report_compare.csv", pairs);
  }
}

}  // namespace gridloc
