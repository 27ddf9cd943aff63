#include "gridloc/config.hpp"

#include <cstdio>
#include <fstream>
#include <set>

#include "gridloc/errors.hpp"

namespace gridloc {

namespace {

using nlohmann::json;

// Reads fields of `obj` into destinations registered with bind(); rejects
// keys that were never registered so typos fail loudly.
class FieldReader {
 public:
  FieldReader(json obj, std::string scope)
      : obj_(std::move(obj)), scope_(std::move(scope)) {
    if (!obj_.is_object())
      throw ConfigError(scope_ + " must be a JSON object");
  }

  ~FieldReader() = default;

  template <typename T>
  void bind(const char* key, T& dst) {
    seen_.insert(key);
    if (!obj_.contains(key)) return;
    try {
      dst = obj_.at(key).get<T>();
    } catch (const json::exception&) {
      throw ConfigError(path(key) + " has the wrong type");
    }
  }

  void subobject(const char* key) { seen_.insert(key); }

  void finish() const {
    for (const auto& [key, value] : obj_.items())
      if (!seen_.contains(key))
        throw ConfigError("unknown config field " + path(key.c_str()));
  }

  std::string path(const char* key) const {
    return scope_.empty() ? key : scope_ + "." + key;
  }

 private:
  json obj_;
  std::string scope_;
  std::set<std::string> seen_;
};

json get_object(const json& j, const char* key) {
  return j.contains(key) ? j.at(key) : json::object();
}

}  // namespace

ExperimentConfig config_from_json(const json& j) {
  ExperimentConfig cfg;

  FieldReader top(j, "");
  top.bind("format_version", cfg.format_version);
  if (cfg.format_version != 1)
    throw ConfigError("format_version: only version 1 is supported");

  if (j.contains("master_seed")) {
    std::uint64_t seed = 0;
    top.bind("master_seed", seed);
    cfg.master_seed = seed;
  } else {
    top.subobject("master_seed");
  }

  {
    FieldReader r(get_object(j, "grid"), "grid");
    top.subobject("grid");
    r.bind("rows", cfg.grid.rows);
    r.bind("cols", cfg.grid.cols);
    r.bind("cell_size_m", cfg.grid.cell_size_m);
    r.bind("origin_x", cfg.grid.origin_x);
    r.bind("origin_y", cfg.grid.origin_y);
    r.finish();
  }
  {
    FieldReader r(get_object(j, "gateways"), "gateways");
    top.subobject("gateways");
    r.bind("rows", cfg.gateways.rows);
    r.bind("cols", cfg.gateways.cols);
    r.bind("spacing_east_m", cfg.gateways.spacing_east_m);
    r.bind("spacing_north_m", cfg.gateways.spacing_north_m);
    r.bind("origin_x", cfg.gateways.origin_x);
    r.bind("origin_y", cfg.gateways.origin_y);
    r.finish();
  }
  {
    FieldReader r(get_object(j, "radio"), "radio");
    top.subobject("radio");
    r.bind("exponent", cfg.radio.exponent);
    r.bind("ref_rss_dbm", cfg.radio.ref_rss_dbm);
    r.bind("perturb_per_gateway", cfg.radio.perturb_per_gateway);
    r.bind("exponent_min", cfg.radio.exponent_min);
    r.bind("exponent_max", cfg.radio.exponent_max);
    r.bind("ref_rss_min_dbm", cfg.radio.ref_rss_min_dbm);
    r.bind("ref_rss_max_dbm", cfg.radio.ref_rss_max_dbm);
    r.bind("noise_sigma_db", cfg.radio.noise_sigma_db);
    r.bind("sensitivity_floor_dbm", cfg.radio.sensitivity_floor_dbm);
    r.finish();
  }
  {
    FieldReader r(get_object(j, "reward"), "reward");
    top.subobject("reward");
    r.bind("near_field_threshold_dbm", cfg.reward.near_field_threshold_dbm);
    r.bind("accept_distance_m", cfg.reward.accept_distance_m);
    r.bind("min_distance_m", cfg.reward.min_distance_m);
    r.finish();
  }
  {
    FieldReader r(get_object(j, "features"), "features");
    top.subobject("features");
    r.bind("rss_min_dbm", cfg.features.rss_min_dbm);
    r.bind("rss_max_dbm", cfg.features.rss_max_dbm);
    r.bind("differential", cfg.features.differential);
    r.bind("datum_gateway_id", cfg.features.datum_gateway_id);
    r.finish();
  }
  {
    FieldReader r(get_object(j, "dqn"), "dqn");
    top.subobject("dqn");
    r.bind("replay_capacity", cfg.dqn.replay_capacity);
    r.bind("replay_start", cfg.dqn.replay_start);
    r.bind("minibatch", cfg.dqn.minibatch);
    r.bind("sync_period", cfg.dqn.sync_period);
    r.bind("discount", cfg.dqn.discount);
    r.bind("epsilon_initial", cfg.dqn.epsilon_initial);
    r.bind("epsilon_final", cfg.dqn.epsilon_final);
    r.bind("epsilon_decay_horizon", cfg.dqn.epsilon_decay_horizon);
    r.bind("learning_rate", cfg.dqn.sgd.learning_rate);
    r.bind("hidden_dims", cfg.dqn.hidden_dims);
    r.finish();
  }
  {
    FieldReader r(get_object(j, "mlat"), "mlat");
    top.subobject("mlat");
    r.bind("assumed_exponent", cfg.mlat.assumed.exponent);
    r.bind("assumed_ref_rss_dbm", cfg.mlat.assumed.ref_rss_dbm);
    r.bind("min_gateways", cfg.mlat.min_gateways);
    r.bind("rss_floor_dbm", cfg.mlat.rss_floor_dbm);
    r.bind("max_iterations", cfg.mlat.max_iterations);
    r.bind("tolerance_m", cfg.mlat.tolerance_m);
    r.bind("initial_damping", cfg.mlat.initial_damping);
    r.bind("min_distance_m", cfg.mlat.min_distance_m);
    r.finish();
  }
  {
    FieldReader r(get_object(j, "fingerprint"), "fingerprint");
    top.subobject("fingerprint");
    r.bind("learning_rate", cfg.fingerprint.learning_rate);
    r.bind("minibatch", cfg.fingerprint.minibatch);
    r.bind("epochs", cfg.fingerprint.epochs);
    r.bind("hidden_dims", cfg.fingerprint.hidden_dims);
    r.bind("holdout_fraction", cfg.fingerprint.holdout_fraction);
    r.finish();
  }
  {
    FieldReader r(get_object(j, "dataset"), "dataset");
    top.subobject("dataset");
    r.bind("train_trajectories", cfg.dataset.train_trajectories);
    r.bind("test_trajectories", cfg.dataset.test_trajectories);
    r.bind("trajectory_steps", cfg.dataset.trajectory_steps);
    r.bind("samples_per_pool", cfg.dataset.samples_per_pool);
    r.finish();
  }
  {
    FieldReader r(get_object(j, "eval"), "eval");
    top.subobject("eval");
    r.bind("initial_row", cfg.eval.initial_row);
    r.bind("initial_col", cfg.eval.initial_col);
    r.finish();
  }
  top.finish();
  return cfg;
}

json config_to_json(const ExperimentConfig& cfg) {
  json j;
  j["format_version"] = cfg.format_version;
  if (cfg.master_seed) j["master_seed"] = *cfg.master_seed;
  j["grid"] = {{"rows", cfg.grid.rows},
               {"cols", cfg.grid.cols},
               {"cell_size_m", cfg.grid.cell_size_m},
               {"origin_x", cfg.grid.origin_x},
               {"origin_y", cfg.grid.origin_y}};
  j["gateways"] = {{"rows", cfg.gateways.rows},
                   {"cols", cfg.gateways.cols},
                   {"spacing_east_m", cfg.gateways.spacing_east_m},
                   {"spacing_north_m", cfg.gateways.spacing_north_m},
                   {"origin_x", cfg.gateways.origin_x},
                   {"origin_y", cfg.gateways.origin_y}};
  j["radio"] = {{"exponent", cfg.radio.exponent},
                {"ref_rss_dbm", cfg.radio.ref_rss_dbm},
                {"perturb_per_gateway", cfg.radio.perturb_per_gateway},
                {"exponent_min", cfg.radio.exponent_min},
                {"exponent_max", cfg.radio.exponent_max},
                {"ref_rss_min_dbm", cfg.radio.ref_rss_min_dbm},
                {"ref_rss_max_dbm", cfg.radio.ref_rss_max_dbm},
                {"noise_sigma_db", cfg.radio.noise_sigma_db},
                {"sensitivity_floor_dbm", cfg.radio.sensitivity_floor_dbm}};
  j["reward"] = {{"near_field_threshold_dbm", cfg.reward.near_field_threshold_dbm},
                 {"accept_distance_m", cfg.reward.accept_distance_m},
                 {"min_distance_m", cfg.reward.min_distance_m}};
  j["features"] = {{"rss_min_dbm", cfg.features.rss_min_dbm},
                   {"rss_max_dbm", cfg.features.rss_max_dbm},
                   {"differential", cfg.features.differential},
                   {"datum_gateway_id", cfg.features.datum_gateway_id}};
  j["dqn"] = {{"replay_capacity", cfg.dqn.replay_capacity},
              {"replay_start", cfg.dqn.replay_start},
              {"minibatch", cfg.dqn.minibatch},
              {"sync_period", cfg.dqn.sync_period},
              {"discount", cfg.dqn.discount},
              {"epsilon_initial", cfg.dqn.epsilon_initial},
              {"epsilon_final", cfg.dqn.epsilon_final},
              {"epsilon_decay_horizon", cfg.dqn.epsilon_decay_horizon},
              {"learning_rate", cfg.dqn.sgd.learning_rate},
              {"hidden_dims", cfg.dqn.hidden_dims}};
  j["mlat"] = {{"assumed_exponent", cfg.mlat.assumed.exponent},
               {"assumed_ref_rss_dbm", cfg.mlat.assumed.ref_rss_dbm},
               {"min_gateways", cfg.mlat.min_gateways},
               {"rss_floor_dbm", cfg.mlat.rss_floor_dbm},
               {"max_iterations", cfg.mlat.max_iterations},
               {"tolerance_m", cfg.mlat.tolerance_m},
               {"initial_damping", cfg.mlat.initial_damping},
               {"min_distance_m", cfg.mlat.min_distance_m}};
  j["fingerprint"] = {{"learning_rate", cfg.fingerprint.learning_rate},
                      {"minibatch", cfg.fingerprint.minibatch},
                      {"epochs", cfg.fingerprint.epochs},
                      {"hidden_dims", cfg.fingerprint.hidden_dims},
                      {"holdout_fraction", cfg.fingerprint.holdout_fraction}};
  j["dataset"] = {{"train_trajectories", cfg.dataset.train_trajectories},
                  {"test_trajectories", cfg.dataset.test_trajectories},
                  {"trajectory_steps", cfg.dataset.trajectory_steps},
                  {"samples_per_pool", cfg.dataset.samples_per_pool}};
  j["eval"] = {{"initial_row", cfg.eval.initial_row},
               {"initial_col", cfg.eval.initial_col}};
  return j;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config parse error in " + path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

void save_config(const ExperimentConfig& cfg,
                 const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write config file " + path.string());
  out << config_to_json(cfg).dump(2) << "\n";
}

void validate_config(const ExperimentConfig& cfg) {
  auto require = [](bool ok, const char* message) {
    if (!ok) throw ConfigError(message);
  };
  require(cfg.master_seed.has_value(),
          "master_seed is required (set it in the config or pass --seed)");
  require(cfg.grid.rows >= 1 && cfg.grid.cols >= 1,
          "grid.rows and grid.cols must be >= 1");
  require(cfg.grid.cell_size_m > 0.0, "grid.cell_size_m must be positive");
  require(cfg.gateways.rows >= 1 && cfg.gateways.cols >= 1,
          "gateways.rows and gateways.cols must be >= 1");
  require(cfg.radio.exponent > 0.0, "radio.exponent must be positive");
  require(cfg.radio.noise_sigma_db >= 0.0,
          "radio.noise_sigma_db must be non-negative");
  if (cfg.radio.perturb_per_gateway) {
    require(cfg.radio.exponent_min > 0.0 &&
                cfg.radio.exponent_max >= cfg.radio.exponent_min,
            "radio.exponent_min/max must define a positive range");
    require(cfg.radio.ref_rss_max_dbm >= cfg.radio.ref_rss_min_dbm,
            "radio.ref_rss_min/max must define a range");
  }
  require(cfg.features.rss_max_dbm > cfg.features.rss_min_dbm,
          "features.rss_max_dbm must exceed features.rss_min_dbm");
  const int gw_count = cfg.gateways.rows * cfg.gateways.cols;
  if (cfg.features.differential)
    require(cfg.features.datum_gateway_id >= 1 &&
                cfg.features.datum_gateway_id <= gw_count,
            "features.datum_gateway_id must name a deployed gateway");
  require(cfg.dataset.train_trajectories >= 1,
          "dataset.train_trajectories must be >= 1");
  require(cfg.dataset.trajectory_steps >= 1,
          "dataset.trajectory_steps must be >= 1");
  require(cfg.dataset.samples_per_pool >= 1,
          "dataset.samples_per_pool must be >= 1");
  require(cfg.eval.initial_row >= 0 && cfg.eval.initial_row < cfg.grid.rows &&
              cfg.eval.initial_col >= 0 && cfg.eval.initial_col < cfg.grid.cols,
          "eval.initial_row/col must lie inside the grid");
  require(cfg.mlat.min_gateways >= 3, "mlat.min_gateways must be >= 3");
  require(cfg.mlat.tolerance_m > 0.0, "mlat.tolerance_m must be positive");
  try {
    validate(cfg.reward);
    validate(cfg.dqn);
    validate(cfg.fingerprint);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

GridMap make_grid(const ExperimentConfig& cfg) {
  return GridMap(cfg.grid.rows, cfg.grid.cols, cfg.grid.cell_size_m,
                 {cfg.grid.origin_x, cfg.grid.origin_y});
}

std::vector<Gateway> make_gateways(const ExperimentConfig& cfg) {
  return gateway_grid_layout(cfg.gateways.rows, cfg.gateways.cols,
                             cfg.gateways.spacing_east_m,
                             cfg.gateways.spacing_north_m,
                             {cfg.gateways.origin_x, cfg.gateways.origin_y});
}

FeatureConfig make_feature_config(const ExperimentConfig& cfg) {
  return {{cfg.features.rss_min_dbm, cfg.features.rss_max_dbm},
          cfg.features.differential,
          static_cast<std::size_t>(cfg.features.datum_gateway_id - 1)};
}

std::string config_hash(const ExperimentConfig& cfg) {
  const std::string canonical = config_to_json(cfg).dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canonical) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace gridloc
