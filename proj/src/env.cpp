#include "gridloc/env.hpp"

#include <algorithm>
#include <stdexcept>

namespace gridloc {

void validate(const RewardConfig& cfg) {
  if (!(cfg.min_distance_m > 0.0))
    throw std::invalid_argument("reward min_distance_m must be positive");
  if (!(cfg.accept_distance_m > cfg.min_distance_m))
    throw std::invalid_argument(
        "reward accept_distance_m must exceed min_distance_m");
}

double compute_reward(CellIndex estimate, const RssVector& rss,
                      const std::vector<Gateway>& gws, const GridMap& map,
                      const RewardConfig& cfg) {
  const auto gw = detect_near_field(rss, cfg.near_field_threshold_dbm);
  if (!gw) return 0.0;
  const double d =
      std::max(cfg.min_distance_m,
               distance(map.cell_center(estimate), gws[*gw].position));
  return d <= cfg.accept_distance_m ? 1.0 / d : -d;
}

std::vector<double> normalize_rss_features(const RssVector& rss,
                                           const NormalizationBounds& norm) {
  if (!(norm.rss_max_dbm > norm.rss_min_dbm))
    throw std::invalid_argument("degenerate normalization");
  const double span = norm.rss_max_dbm - norm.rss_min_dbm;
  std::vector<double> out(rss.size(), 0.0);
  for (std::size_t i = 0; i < rss.size(); ++i) {
    if (!rss.present(i)) continue;
    out[i] = std::clamp((rss.at(i) - norm.rss_min_dbm) / span, 0.0, 1.0);
  }
  return out;
}

StateVector state_reformulation(const AgentState& s, const GridMap& map,
                                const NormalizationBounds& norm) {
  StateVector phi;
  phi.reserve(2 + s.rss.size());
  phi.push_back(map.rows() > 1
                    ? static_cast<double>(s.estimate.row()) / (map.rows() - 1)
                    : 0.0);
  phi.push_back(map.cols() > 1
                    ? static_cast<double>(s.estimate.col()) / (map.cols() - 1)
                    : 0.0);
  for (double f : normalize_rss_features(s.rss, norm)) phi.push_back(f);
  return phi;
}

StateVector build_state_features(CellIndex estimate, const RssVector& rss,
                                 const GridMap& map, const FeatureConfig& fc) {
  if (fc.differential)
    return state_reformulation({estimate, differential_rss(rss, fc.datum_index)},
                               map, fc.norm);
  return state_reformulation({estimate, rss}, map, fc.norm);
}

Trajectory generate_trajectory(const GridMap& map, const RssDatabase& db,
                               std::size_t steps, std::uint64_t seed) {
  if (steps < 1) throw std::invalid_argument("trajectory needs at least one step");
  Rng rng(seed);
  Trajectory traj;
  traj.seed = seed;
  traj.true_cells.reserve(steps);
  traj.rss_seq.reserve(steps);

  CellIndex cell = map.cell_from_id(
      static_cast<int>(rng.below(static_cast<std::uint64_t>(map.cell_count()))));
  traj.true_cells.push_back(cell);
  traj.rss_seq.push_back(sample_rss_from_db(db, cell, rng));

  for (std::size_t t = 1; t < steps; ++t) {
    const auto actions = map.available_actions(cell).to_vector();
    cell = map.apply_action(cell, actions[rng.below(actions.size())]);
    traj.true_cells.push_back(cell);
    traj.rss_seq.push_back(sample_rss_from_db(db, cell, rng));
  }
  return traj;
}

StepResult step(const AgentState& s, Action a, RssVector next_rss,
                const GridMap& map, const std::vector<Gateway>& gws,
                const RewardConfig& cfg) {
  const CellIndex next = map.apply_action(s.estimate, a);
  const double reward = compute_reward(next, next_rss, gws, map, cfg);
  return {AgentState{next, std::move(next_rss)}, reward};
}

}  // namespace gridloc
