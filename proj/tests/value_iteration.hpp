#pragma once

// Tabular value-iteration oracle for small noiseless gridworlds: the joint
// state is (estimate cell, agent cell), the agent random-walks uniformly
// over its available actions, and the policy moves the estimate. Built
// independently of the DQN path so it can judge learned policies.

#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "gridloc/env.hpp"

namespace gridloc::testing {

class TabularOracle {
 public:
  TabularOracle(const GridMap& map, const std::vector<Gateway>& gws,
                const std::vector<PathLossParams>& params,
                const RewardConfig& reward_cfg, double floor_dbm, double gamma)
      : map_(map), gamma_(gamma) {
    const int cells = map.cell_count();

    // Noiseless measurement per agent cell.
    Rng rng(0);
    rss_.reserve(cells);
    for (int c = 0; c < cells; ++c)
      rss_.push_back(simulate_rss(map.cell_center(map.cell_from_id(c)), gws,
                                  params, NoiseModel{0.0}, floor_dbm, rng));

    // Uniform random-walk transition of the agent cell.
    agent_moves_.resize(cells);
    for (int c = 0; c < cells; ++c) {
      const auto actions = map.available_actions(map.cell_from_id(c)).to_vector();
      for (Action a : actions)
        agent_moves_[c].push_back(
            map.cell_id(map.apply_action(map.cell_from_id(c), a)));
    }

    // Immediate reward of landing estimate e while the agent sits at c.
    reward_.assign(static_cast<std::size_t>(cells) * cells, 0.0);
    for (int e = 0; e < cells; ++e)
      for (int c = 0; c < cells; ++c)
        reward_[joint(e, c)] = compute_reward(map.cell_from_id(e), rss_[c], gws,
                                              map, reward_cfg);

    solve(cells);
  }

  const RssVector& measurement(int agent_cell) const { return rss_[agent_cell]; }

  double q_value(int estimate, int agent, Action a) const {
    return q_[joint(estimate, agent) * kActionCount + static_cast<int>(a)];
  }

  // Greedy action when it is unique within `gap`; nullopt on near-ties or
  // unavailable states.
  std::optional<Action> unique_greedy(int estimate, int agent,
                                      double gap = 1e-9) const {
    const ActionSet available =
        map_.available_actions(map_.cell_from_id(estimate));
    double best = -std::numeric_limits<double>::infinity();
    double second = best;
    Action arg = Action::Stay;
    for (int i = 0; i < kActionCount; ++i) {
      const auto a = static_cast<Action>(i);
      if (!available.contains(a)) continue;
      const double q = q_value(estimate, agent, a);
      if (q > best) {
        second = best;
        best = q;
        arg = a;
      } else if (q > second) {
        second = q;
      }
    }
    if (best - second <= gap) return std::nullopt;
    return arg;
  }

 private:
  std::size_t joint(int estimate, int agent) const {
    return static_cast<std::size_t>(estimate) * rss_.size() + agent;
  }

  void solve(int cells) {
    const std::size_t joints = static_cast<std::size_t>(cells) * cells;
    q_.assign(joints * kActionCount, 0.0);
    std::vector<double> value(joints, 0.0);

    for (int sweep = 0; sweep < 100000; ++sweep) {
      double delta = 0.0;
      for (int e = 0; e < cells; ++e) {
        const auto estimate_cell = map_.cell_from_id(e);
        const ActionSet available = map_.available_actions(estimate_cell);
        for (int c = 0; c < cells; ++c) {
          for (int i = 0; i < kActionCount; ++i) {
            const auto a = static_cast<Action>(i);
            if (!available.contains(a)) continue;
            const int next_e = map_.cell_id(map_.apply_action(estimate_cell, a));
            double q = 0.0;
            const auto& moves = agent_moves_[c];
            for (int next_c : moves)
              q += reward_[joint(next_e, next_c)] +
                   gamma_ * value[joint(next_e, next_c)];
            q /= static_cast<double>(moves.size());
            q_[joint(e, c) * kActionCount + i] = q;
          }
        }
      }
      for (int e = 0; e < cells; ++e) {
        const ActionSet available =
            map_.available_actions(map_.cell_from_id(e));
        for (int c = 0; c < cells; ++c) {
          double best = -std::numeric_limits<double>::infinity();
          for (int i = 0; i < kActionCount; ++i)
            if (available.contains(static_cast<Action>(i)))
              best = std::max(best, q_[joint(e, c) * kActionCount + i]);
          delta = std::max(delta, std::abs(best - value[joint(e, c)]));
          value[joint(e, c)] = best;
        }
      }
      if (delta < 1e-12) break;
    }
  }

  const GridMap& map_;
  double gamma_;
  std::vector<RssVector> rss_;
  std::vector<std::vector<int>> agent_moves_;
  std::vector<double> reward_;
  std::vector<double> q_;
};

}  // namespace gridloc::testing
