#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "gridloc/baselines.hpp"
#include "gridloc/dqn.hpp"
#include "gridloc/env.hpp"

namespace gridloc {

struct GridSpec {
  int rows = 16;
  int cols = 28;
  double cell_size_m = 5.0;
  double origin_x = 0.0;
  double origin_y = 0.0;

  bool operator==(const GridSpec&) const = default;
};

struct GatewayLayoutSpec {
  int rows = 4;
  int cols = 5;
  double spacing_east_m = 30.0;
  double spacing_north_m = 24.0;
  double origin_x = 0.0;
  double origin_y = 0.0;

  bool operator==(const GatewayLayoutSpec&) const = default;
};

struct RadioSpec {
  double exponent = 2.0;
  double ref_rss_dbm = -50.0;
  // Optional per-gateway truth perturbation, for the model-mismatch setting.
  bool perturb_per_gateway = false;
  double exponent_min = 1.8;
  double exponent_max = 2.6;
  double ref_rss_min_dbm = -55.0;
  double ref_rss_max_dbm = -45.0;
  double noise_sigma_db = 4.0;
  double sensitivity_floor_dbm = -100.0;

  bool operator==(const RadioSpec&) const = default;
};

struct FeatureSpec {
  double rss_min_dbm = -100.0;
  double rss_max_dbm = -30.0;
  bool differential = false;
  int datum_gateway_id = 8;  // 1-based

  bool operator==(const FeatureSpec&) const = default;
};

struct DatasetSpec {
  std::uint32_t train_trajectories = 10000;
  std::uint32_t test_trajectories = 100;
  std::uint32_t trajectory_steps = 300;
  std::uint32_t samples_per_pool = 2000;

  bool operator==(const DatasetSpec&) const = default;
};

struct EvalSpec {
  int initial_row = 0;
  int initial_col = 0;

  bool operator==(const EvalSpec&) const = default;
};

// Whole-experiment configuration. The master seed expands through
// derive_seed(master, stage) into the per-stage streams (see rng.hpp), so
// every pipeline stage is reproducible in isolation.
struct ExperimentConfig {
  int format_version = 1;
  GridSpec grid;
  GatewayLayoutSpec gateways;
  RadioSpec radio;
  RewardConfig reward;
  FeatureSpec features;
  DqnConfig dqn;
  MlatConfig mlat;
  FingerprintTrainConfig fingerprint;
  DatasetSpec dataset;
  EvalSpec eval;
  std::optional<std::uint64_t> master_seed;
};

// Strict parse: unknown or ill-typed keys raise ConfigError naming the
// field. Missing keys take the defaults above.
ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& cfg);

ExperimentConfig load_config(const std::filesystem::path& path);
void save_config(const ExperimentConfig& cfg, const std::filesystem::path& path);

// Cross-field validation; throws ConfigError naming the offending field.
// Requires master_seed to be set.
void validate_config(const ExperimentConfig& cfg);

// Derived objects.
GridMap make_grid(const ExperimentConfig& cfg);
std::vector<Gateway> make_gateways(const ExperimentConfig& cfg);
FeatureConfig make_feature_config(const ExperimentConfig& cfg);

// FNV-1a hash of the canonical serialized form, hex-encoded.
std::string config_hash(const ExperimentConfig& cfg);

}  // namespace gridloc
