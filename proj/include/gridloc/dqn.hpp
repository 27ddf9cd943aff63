#pragma once

#include <cstdint>
#include <vector>

#include "gridloc/env.hpp"
#include "gridloc/mlp.hpp"

namespace gridloc {

// Bounded FIFO ring of experience tuples; insertion beyond capacity evicts
// the oldest tuple.
class ReplayMemory {
 public:
  explicit ReplayMemory(std::size_t capacity);

  std::size_t capacity() const { return capacity_; }
  std::size_t size() const { return size_; }

  void push(ExperienceTuple e);

  // i = 0 is the oldest stored tuple.
  const ExperienceTuple& at(std::size_t i) const;

 private:
  std::size_t capacity_;
  std::size_t head_ = 0;  // next write slot
  std::size_t size_ = 0;
  std::vector<ExperienceTuple> ring_;
};

// n indices drawn uniformly with replacement (0 = oldest). Throws
// std::runtime_error("replay not warm") until the memory holds at least
// max(n, warm_start_size) tuples.
std::vector<std::size_t> sample_minibatch(const ReplayMemory& mem,
                                          std::size_t n,
                                          std::size_t warm_start_size,
                                          Rng& rng);

struct EpsilonSchedule {
  double initial = 1.0;
  double final_value = 0.05;
  long decay_horizon = 1;
};

// Linear decay: initial - (initial - final) * min(1, t / horizon).
double epsilon_at(const EpsilonSchedule& s, long t);

struct DqnConfig {
  std::size_t replay_capacity = 10000;
  std::size_t replay_start = 2500;
  std::size_t minibatch = 200;
  long sync_period = 100;  // target-network refresh interval, in steps
  double discount = 0.9;
  double epsilon_initial = 1.0;
  double epsilon_final = 0.05;
  long epsilon_decay_horizon = 0;  // 0 = half of the total training steps
  SgdConfig sgd;
  std::vector<int> hidden_dims = {200, 200};
};

// Throws std::invalid_argument naming the offending field.
void validate(const DqnConfig& cfg);

struct QNetworkPair {
  Mlp q_net;
  Mlp target_net;
  long steps_since_sync = 0;
};

void sync_target(QNetworkPair& pair);

// Epsilon-greedy over the available set; unavailable actions are masked out
// of the argmax and never selected.
Action select_action(const QNetworkPair& pair, const StateVector& phi,
                     const ActionSet& available, double epsilon, Rng& rng);

// y_j = reward_j + gamma * max over next-available actions of the target
// network's inference-mode output on phi_next.
Eigen::VectorXd compute_targets(const std::vector<const ExperienceTuple*>& batch,
                                const Mlp& target_net, double gamma);

struct TrainingStepRecord {
  long step = 0;  // global environment step at which the update ran
  double loss = 0.0;
  double reward = 0.0;
  double epsilon = 0.0;
};

struct TrainingLog {
  std::vector<TrainingStepRecord> updates;  // one record per SGD update
  std::vector<double> episode_returns;      // discounted return per episode
};

struct DqnTrainResult {
  QNetworkPair pair;
  TrainingLog log;
};

// Runs the full training loop over the dataset, one episode per trajectory:
// build features, pick an epsilon-greedy action over the available set,
// move the estimate, score the post-move estimate against the next
// measurement, stack the tuple, and after warm-up run one SGD update per
// step with periodic target sync. Deterministic given the two seeds.
// Throws on an empty dataset; aborts with "training diverged" on a
// non-finite loss.
DqnTrainResult train_dqn(const std::vector<Trajectory>& dataset,
                         const GridMap& map, const std::vector<Gateway>& gws,
                         const RewardConfig& reward_cfg,
                         const FeatureConfig& features, const DqnConfig& cfg,
                         std::uint64_t init_seed, std::uint64_t train_seed);

// Greedy rollout: from initial_estimate, repeatedly take the
// available-masked argmax action and record the post-move estimate, one per
// measurement. Inference mode only; the network is not modified.
std::vector<CellIndex> localize_trajectory(const QNetworkPair& pair,
                                           const std::vector<RssVector>& rss_seq,
                                           const GridMap& map,
                                           const FeatureConfig& features,
                                           CellIndex initial_estimate);

}  // namespace gridloc
