#pragma once

#include <cstdint>
#include <vector>

#include "gridloc/env.hpp"
#include "gridloc/mlp.hpp"

namespace gridloc {

struct MlatConfig {
  PathLossParams assumed{2.0, -50.0};  // experience values
  std::size_t min_gateways = 3;
  double rss_floor_dbm = -100.0;
  int max_iterations = 50;
  double tolerance_m = 1e-6;
  double initial_damping = 1e-3;
  // Model distances clamp here, matching the ranging reference distance.
  double min_distance_m = 1.0;
};

// Converts each usable RSS to a range with the assumed path-loss parameters
// and solves min_p sum_i (max(min_distance, |p - p_i|) - d_i)^2 by
// Levenberg-damped Gauss-Newton from the RSS-weighted gateway centroid.
// Throws std::runtime_error("insufficient gateways") below min_gateways and
// std::runtime_error("degenerate geometry") when damping escalation fails
// to produce a usable step.
Position multilaterate(const RssVector& rss, const std::vector<Gateway>& gws,
                       const MlatConfig& cfg);

// Residual 2-norm of the multilateration cost at p; exposed for testing the
// descent property.
double multilateration_residual(const Position& p, const RssVector& rss,
                                const std::vector<Gateway>& gws,
                                const MlatConfig& cfg);

// Supervised cell classifier over RSS features.
struct FingerprintModel {
  Mlp net;
  FeatureConfig features;
  int grid_rows = 0;
  int grid_cols = 0;
};

struct FingerprintTrainConfig {
  double learning_rate = 0.001;
  std::size_t minibatch = 200;
  int epochs = 30;
  std::vector<int> hidden_dims = {200, 200};
  double holdout_fraction = 0.1;
};

void validate(const FingerprintTrainConfig& cfg);

struct LabeledRss {
  RssVector rss;
  CellIndex cell;
};

struct FingerprintTrainReport {
  double holdout_accuracy = 0.0;
  double final_epoch_loss = 0.0;
  std::size_t train_samples = 0;
  std::size_t holdout_samples = 0;
};

struct FingerprintTrainResult {
  FingerprintModel model;
  FingerprintTrainReport report;
};

// Minibatch SGD on softmax cross-entropy from RSS features to row-major
// cell id. Deterministic given the seed. Throws on empty data.
FingerprintTrainResult train_fingerprint(const std::vector<LabeledRss>& labeled,
                                         const GridMap& map,
                                         const FeatureConfig& features,
                                         const FingerprintTrainConfig& cfg,
                                         std::uint64_t seed);

// Raw (pre-softmax) per-cell scores.
Eigen::VectorXd fingerprint_scores(const FingerprintModel& model,
                                   const RssVector& rss);

// Argmax cell; exact ties break toward the lower row-major id. Throws on
// feature-width or grid mismatch.
CellIndex predict_fingerprint(const FingerprintModel& model,
                              const RssVector& rss, const GridMap& map);

}  // namespace gridloc
