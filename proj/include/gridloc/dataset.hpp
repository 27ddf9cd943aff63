#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "gridloc/env.hpp"
#include "gridloc/grid.hpp"
#include "gridloc/radio.hpp"

namespace gridloc {

inline constexpr std::uint32_t kDatasetFormatVersion = 1;

// Self-describing experiment dataset: the deployment, the true simulation
// parameters, the per-cell sample pools, and the generated trajectories.
// The byte layout is documented in docs/formats.md.
struct Dataset {
  GridMap map;
  std::vector<Gateway> gateways;
  std::vector<PathLossParams> gateway_params;  // true per-gateway parameters
  double noise_sigma_db = 0.0;
  double sensitivity_floor_dbm = kDefaultSensitivityFloorDbm;
  std::uint64_t master_seed = 0;
  RssDatabase db;
  std::vector<Trajectory> train;
  std::vector<Trajectory> test;
};

void write_dataset(const Dataset& ds, const std::filesystem::path& path);

// Throws DataError on bad magic, unsupported version, or truncation.
Dataset read_dataset(const std::filesystem::path& path);

}  // namespace gridloc
