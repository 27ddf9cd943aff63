#pragma once

#include <cstdint>
#include <filesystem>
#include <utility>

#include "gridloc/env.hpp"
#include "gridloc/mlp.hpp"

namespace gridloc {

inline constexpr std::uint32_t kModelFormatVersion = 1;

enum class ModelKind : std::uint8_t {
  QNetwork = 0,
  FingerprintClassifier = 1,
};

// Everything a consumer needs besides the parameters: what the network is,
// the grid it indexes, and the feature recipe it was trained with.
struct ModelHeader {
  ModelKind kind = ModelKind::QNetwork;
  int grid_rows = 0;
  int grid_cols = 0;
  FeatureConfig features;
};

void write_model(const Mlp& net, const ModelHeader& header,
                 const std::filesystem::path& path);

// Throws DataError on bad magic, unsupported version, or truncation.
std::pair<Mlp, ModelHeader> read_model(const std::filesystem::path& path);

}  // namespace gridloc
