#include "gridloc/dqn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace gridloc {

ReplayMemory::ReplayMemory(std::size_t capacity) : capacity_(capacity) {
  if (capacity < 1) throw std::invalid_argument("replay capacity must be >= 1");
  ring_.reserve(capacity);
}

void ReplayMemory::push(ExperienceTuple e) {
  if (size_ < capacity_) {
    ring_.push_back(std::move(e));
    ++size_;
  } else {
    ring_[head_] = std::move(e);
    head_ = (head_ + 1) % capacity_;
  }
}

const ExperienceTuple& ReplayMemory::at(std::size_t i) const {
  if (i >= size_) throw std::out_of_range("replay index");
  return ring_[(head_ + i) % size_];
}

std::vector<std::size_t> sample_minibatch(const ReplayMemory& mem,
                                          std::size_t n,
                                          std::size_t warm_start_size,
                                          Rng& rng) {
  // With-replacement draws work for any non-empty memory, so the gate is
  // the warm-start size alone.
  if (mem.size() < std::max<std::size_t>(warm_start_size, 1))
    throw std::runtime_error("replay not warm");
  std::vector<std::size_t> idx(n);
  for (auto& i : idx) i = rng.below(mem.size());
  return idx;
}

double epsilon_at(const EpsilonSchedule& s, long t) {
  // Exact at both endpoints.
  if (t <= 0) return s.initial;
  if (t >= s.decay_horizon) return s.final_value;
  return s.initial - (s.initial - s.final_value) *
                         (static_cast<double>(t) /
                          static_cast<double>(s.decay_horizon));
}

void validate(const DqnConfig& cfg) {
  if (cfg.replay_start > cfg.replay_capacity)
    throw std::invalid_argument("dqn.replay_start must be <= replay_capacity");
  if (cfg.minibatch < 2 || cfg.minibatch > cfg.replay_start)
    throw std::invalid_argument("dqn.minibatch must be in [2, replay_start]");
  if (cfg.discount < 0.0 || cfg.discount > 1.0)
    throw std::invalid_argument("dqn.discount must be in [0, 1]");
  if (cfg.sync_period < 1)
    throw std::invalid_argument("dqn.sync_period must be >= 1");
  if (cfg.epsilon_initial < cfg.epsilon_final || cfg.epsilon_final < 0.0 ||
      cfg.epsilon_initial > 1.0)
    throw std::invalid_argument("dqn epsilon endpoints must satisfy 0 <= final <= initial <= 1");
  if (cfg.epsilon_decay_horizon < 0)
    throw std::invalid_argument("dqn.epsilon_decay_horizon must be >= 0");
  if (!(cfg.sgd.learning_rate > 0.0))
    throw std::invalid_argument("dqn.learning_rate must be positive");
  if (cfg.hidden_dims.empty())
    throw std::invalid_argument("dqn.hidden_dims must not be empty");
}

void sync_target(QNetworkPair& pair) {
  pair.target_net = pair.q_net;
  pair.steps_since_sync = 0;
}

namespace {

Eigen::RowVectorXd to_row(const StateVector& phi) {
  return Eigen::Map<const Eigen::RowVectorXd>(phi.data(),
                                              static_cast<Eigen::Index>(phi.size()));
}

Action masked_argmax(const Eigen::RowVectorXd& q_row,
                     const ActionSet& available) {
  Action best = Action::Stay;
  double best_q = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < kActionCount; ++i) {
    const auto a = static_cast<Action>(i);
    if (!available.contains(a)) continue;
    if (q_row(i) > best_q) {
      best_q = q_row(i);
      best = a;
    }
  }
  return best;
}

}  // namespace

Action select_action(const QNetworkPair& pair, const StateVector& phi,
                     const ActionSet& available, double epsilon, Rng& rng) {
  if (available.empty()) throw std::invalid_argument("empty action set");
  if (rng.uniform01() < epsilon) {
    const auto actions = available.to_vector();
    return actions[rng.below(actions.size())];
  }
  const Eigen::MatrixXd q = pair.q_net.infer(to_row(phi));
  return masked_argmax(q.row(0), available);
}

Eigen::VectorXd compute_targets(const std::vector<const ExperienceTuple*>& batch,
                                const Mlp& target_net, double gamma) {
  if (batch.empty()) throw std::invalid_argument("empty batch");
  const auto width = static_cast<Eigen::Index>(batch[0]->phi_next.size());
  Eigen::MatrixXd next(static_cast<Eigen::Index>(batch.size()), width);
  for (std::size_t j = 0; j < batch.size(); ++j)
    next.row(static_cast<Eigen::Index>(j)) = to_row(batch[j]->phi_next);

  const Eigen::MatrixXd q_next = target_net.infer(next);
  Eigen::VectorXd targets(static_cast<Eigen::Index>(batch.size()));
  for (std::size_t j = 0; j < batch.size(); ++j) {
    double best = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < kActionCount; ++i)
      if (batch[j]->next_available.contains(static_cast<Action>(i)))
        best = std::max(best, q_next(static_cast<Eigen::Index>(j), i));
    targets(static_cast<Eigen::Index>(j)) = batch[j]->reward + gamma * best;
  }
  return targets;
}

DqnTrainResult train_dqn(const std::vector<Trajectory>& dataset,
                         const GridMap& map, const std::vector<Gateway>& gws,
                         const RewardConfig& reward_cfg,
                         const FeatureConfig& features, const DqnConfig& cfg,
                         std::uint64_t init_seed, std::uint64_t train_seed) {
  if (dataset.empty()) throw std::invalid_argument("empty dataset");
  validate(cfg);
  validate(reward_cfg);

  long total_steps = 0;
  for (const Trajectory& traj : dataset)
    total_steps += static_cast<long>(traj.rss_seq.size());

  EpsilonSchedule schedule{cfg.epsilon_initial, cfg.epsilon_final,
                           cfg.epsilon_decay_horizon > 0
                               ? cfg.epsilon_decay_horizon
                               : std::max(1L, total_steps / 2)};

  MlpDims dims{2 + static_cast<int>(gws.size()), cfg.hidden_dims, kActionCount};
  Rng init_rng(init_seed);
  QNetworkPair pair{Mlp::init(dims, init_rng), Mlp(), 0};
  pair.target_net = pair.q_net;

  Rng rng(train_seed);
  ReplayMemory memory(cfg.replay_capacity);
  TrainingLog log;

  Eigen::MatrixXd batch(static_cast<Eigen::Index>(cfg.minibatch), dims.input);
  std::vector<int> batch_actions(cfg.minibatch);
  std::vector<const ExperienceTuple*> batch_tuples(cfg.minibatch);

  long global_step = 0;
  for (const Trajectory& traj : dataset) {
    CellIndex estimate = map.cell_from_id(
        static_cast<int>(rng.below(static_cast<std::uint64_t>(map.cell_count()))));
    StateVector phi_prev;
    Action action_prev = Action::Stay;
    double episode_return = 0.0;
    double discount_pow = 1.0;

    for (std::size_t t = 0; t < traj.rss_seq.size(); ++t) {
      const RssVector& rss = traj.rss_seq[t];
      // Reward scores the post-action estimate against this step's
      // measurement; raw measurements feed the landmark gate even when the
      // network consumes differential features.
      const double reward = compute_reward(estimate, rss, gws, map, reward_cfg);
      episode_return += discount_pow * reward;
      discount_pow *= cfg.discount;

      StateVector phi = build_state_features(estimate, rss, map, features);
      if (t > 0)
        memory.push({std::move(phi_prev), action_prev, reward, phi,
                     map.available_actions(estimate)});

      const ActionSet available = map.available_actions(estimate);
      const double eps = epsilon_at(schedule, global_step);
      const Action action = select_action(pair, phi, available, eps, rng);
      estimate = map.apply_action(estimate, action);
      phi_prev = std::move(phi);
      action_prev = action;

      if (memory.size() >= cfg.replay_start) {
        const auto idx = sample_minibatch(memory, cfg.minibatch,
                                          cfg.replay_start, rng);
        for (std::size_t j = 0; j < idx.size(); ++j) {
          const ExperienceTuple& e = memory.at(idx[j]);
          batch_tuples[j] = &e;
          batch.row(static_cast<Eigen::Index>(j)) = to_row(e.phi_prev);
          batch_actions[j] = static_cast<int>(e.action);
        }
        const Eigen::VectorXd targets =
            compute_targets(batch_tuples, pair.target_net, cfg.discount);
        const LossResult result =
            mse_loss_and_grad(pair.q_net, batch, batch_actions, targets);
        if (!std::isfinite(result.loss))
          throw std::runtime_error("training diverged");
        sgd_update(pair.q_net, result.grads, cfg.sgd);
        log.updates.push_back({global_step, result.loss, reward, eps});
      }

      ++global_step;
      ++pair.steps_since_sync;
      if (global_step % cfg.sync_period == 0) sync_target(pair);
    }
    log.episode_returns.push_back(episode_return);
  }
  return {std::move(pair), std::move(log)};
}

std::vector<CellIndex> localize_trajectory(const QNetworkPair& pair,
                                           const std::vector<RssVector>& rss_seq,
                                           const GridMap& map,
                                           const FeatureConfig& features,
                                           CellIndex initial_estimate) {
  std::vector<CellIndex> estimates;
  estimates.reserve(rss_seq.size());
  CellIndex estimate = initial_estimate;
  for (const RssVector& rss : rss_seq) {
    const StateVector phi = build_state_features(estimate, rss, map, features);
    const Eigen::MatrixXd q = pair.q_net.infer(to_row(phi));
    estimate = map.apply_action(
        estimate, masked_argmax(q.row(0), map.available_actions(estimate)));
    estimates.push_back(estimate);
  }
  return estimates;
}

}  // namespace gridloc
