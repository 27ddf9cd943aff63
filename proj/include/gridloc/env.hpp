#pragma once

#include <cstdint>
#include <vector>

#include "gridloc/grid.hpp"
#include "gridloc/radio.hpp"

namespace gridloc {

// The MDP state: the agent's current location estimate plus the measurement
// taken at this time step.
struct AgentState {
  CellIndex estimate;
  RssVector rss;
};

struct NormalizationBounds {
  double rss_min_dbm = -100.0;
  double rss_max_dbm = -30.0;

  bool operator==(const NormalizationBounds&) const = default;
};

// Network input features, all in [0, 1]:
// [row_norm, col_norm, rss_norm_1 .. rss_norm_G].
using StateVector = std::vector<double>;

struct RewardConfig {
  double near_field_threshold_dbm = -64.0;  // landmark RSS gate
  double accept_distance_m = 10.0;          // positive/negative branch split
  double min_distance_m = 1.0;              // clamp below, avoids 1/d blowup

  bool operator==(const RewardConfig&) const = default;
};

// Throws std::invalid_argument naming the offending field.
void validate(const RewardConfig& cfg);

// Landmark reward: with i the near-field gateway for rss (none -> 0) and
// d = max(min_distance, |cell_center(estimate) - gw_i|):
// d <= accept_distance -> 1/d, otherwise -> -d.
double compute_reward(CellIndex estimate, const RssVector& rss,
                      const std::vector<Gateway>& gws, const GridMap& map,
                      const RewardConfig& cfg);

// RSS part of the feature map: (rss - min) / (max - min) clipped to [0, 1],
// missing entries -> 0. Throws std::invalid_argument("degenerate
// normalization") when max <= min.
std::vector<double> normalize_rss_features(const RssVector& rss,
                                           const NormalizationBounds& norm);

StateVector state_reformulation(const AgentState& s, const GridMap& map,
                                const NormalizationBounds& norm);

// Feature recipe shared by the Q-network and the fingerprint classifier.
// With differential set, measurements are re-referenced to the datum gateway
// before normalization (reward detection always sees raw measurements).
struct FeatureConfig {
  NormalizationBounds norm;
  bool differential = false;
  std::size_t datum_index = 0;

  bool operator==(const FeatureConfig&) const = default;
};

StateVector build_state_features(CellIndex estimate, const RssVector& rss,
                                 const GridMap& map, const FeatureConfig& fc);

struct Trajectory {
  std::vector<CellIndex> true_cells;
  std::vector<RssVector> rss_seq;
  std::uint64_t seed = 0;
};

// Random walk of `steps` single-grid moves: uniform initial cell, then a
// uniform draw over the available actions at each visited cell, with one
// database draw per step.
Trajectory generate_trajectory(const GridMap& map, const RssDatabase& db,
                               std::size_t steps, std::uint64_t seed);

struct StepResult {
  AgentState state;
  double reward = 0.0;
};

// Deterministic estimate transition: moves the estimate by `a`, swaps in the
// next measurement, and scores the post-move estimate against it.
StepResult step(const AgentState& s, Action a, RssVector next_rss,
                const GridMap& map, const std::vector<Gateway>& gws,
                const RewardConfig& cfg);

// Replay record (phi(s_{t-1}), a_{t-1}, r_t, phi(s_t)) plus the action set
// legal at the next estimate, which target computation needs for masking.
struct ExperienceTuple {
  StateVector phi_prev;
  Action action = Action::Stay;
  double reward = 0.0;
  StateVector phi_next;
  ActionSet next_available;
};

}  // namespace gridloc
