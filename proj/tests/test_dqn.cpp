#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "gradient_check.hpp"
#include "gridloc/dqn.hpp"
#include "value_iteration.hpp"

using namespace gridloc;

namespace {

ExperienceTuple tagged_tuple(double reward) {
  ExperienceTuple e;
  e.phi_prev = {0.0, 0.0};
  e.phi_next = {0.0, 0.0};
  e.reward = reward;
  e.next_available.insert(Action::Stay);
  return e;
}

// Zero-weight network whose Q-row equals the output biases everywhere.
QNetworkPair constant_q_pair(const Eigen::VectorXd& biases, int input_width) {
  Rng rng(0);
  Mlp net = Mlp::init({input_width, {}, static_cast<int>(biases.size())}, rng);
  net.output_layer().weights.setZero();
  net.output_layer().biases = biases;
  QNetworkPair pair{net, net, 0};
  return pair;
}

struct TinyWorld {
  GridMap map{3, 3, 5.0};
  std::vector<Gateway> gws{{1, {7.5, 7.5}}};
  std::vector<PathLossParams> params{{2.0, -50.0}};
  RewardConfig reward{-60.0, 6.0, 1.0};
  FeatureConfig features{{-100.0, -30.0}, false, 0};

  std::vector<Trajectory> make_dataset(int count, int steps,
                                       std::uint64_t seed) const {
    Rng build(seed);
    const RssDatabase db =
        build_rss_database(map, gws, params, NoiseModel{0.0}, -100.0, 1, build);
    std::vector<Trajectory> out;
    for (int i = 0; i < count; ++i)
      out.push_back(generate_trajectory(map, db, steps,
                                        derive_seed(seed, 100 + i)));
    return out;
  }
};

}  // namespace

TEST_SUITE("dqn") {

TEST_CASE("replay memory is a strict FIFO ring") {
  ReplayMemory mem(3);
  CHECK(mem.capacity() == 3);
  for (int k = 1; k <= 4; ++k) mem.push(tagged_tuple(k));
  CHECK(mem.size() == 3);
  CHECK(mem.at(0).reward == 2.0);
  CHECK(mem.at(1).reward == 3.0);
  CHECK(mem.at(2).reward == 4.0);

  SUBCASE("length counts pushes until capacity") {
    ReplayMemory small(10);
    for (int k = 0; k < 7; ++k) {
      small.push(tagged_tuple(k));
      CHECK(small.size() == static_cast<std::size_t>(k + 1));
    }
  }

  SUBCASE("eviction order is exhaustively FIFO") {
    ReplayMemory ring(5);
    for (int k = 0; k < 23; ++k) {
      ring.push(tagged_tuple(k));
      const int expect_oldest = std::max(0, k - 4);
      CHECK(ring.at(0).reward == static_cast<double>(expect_oldest));
      CHECK(ring.at(ring.size() - 1).reward == static_cast<double>(k));
    }
  }

  SUBCASE("default capacity matches the configured replay size") {
    CHECK(DqnConfig{}.replay_capacity == 10000);
  }
}

TEST_CASE("minibatch sampling gates on the warm-start size") {
  ReplayMemory mem(100);
  for (int k = 0; k < 10; ++k) mem.push(tagged_tuple(k));
  Rng rng(1);
  CHECK_THROWS_WITH_AS(sample_minibatch(mem, 4, 50, rng), "replay not warm",
                       std::runtime_error);

  SUBCASE("single tuple samples with replacement") {
    ReplayMemory one(8);
    one.push(tagged_tuple(42));
    const auto idx = sample_minibatch(one, 3, 1, rng);
    REQUIRE(idx.size() == 3);
    for (std::size_t i : idx) CHECK(one.at(i).reward == 42.0);
  }

  SUBCASE("indices stay in range") {
    const auto idx = sample_minibatch(mem, 64, 5, rng);
    for (std::size_t i : idx) CHECK(i < mem.size());
  }
}

TEST_CASE("epsilon schedule") {
  const EpsilonSchedule s{1.0, 0.05, 1000};
  CHECK(epsilon_at(s, 0) == 1.0);
  CHECK(epsilon_at(s, 1000) == 0.05);
  CHECK(epsilon_at(s, 5000) == 0.05);
  CHECK(epsilon_at(s, 500) == doctest::Approx(0.525).epsilon(1e-12));

  double prev = 2.0;
  for (long t = 0; t <= 1200; t += 7) {
    const double eps = epsilon_at(s, t);
    CHECK(eps <= prev);
    CHECK(eps >= s.final_value);
    CHECK(eps <= s.initial);
    prev = eps;
  }
}

TEST_CASE("action selection") {
  Eigen::VectorXd biases(9);
  biases << 0.1, 0.9, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8;
  const QNetworkPair pair = constant_q_pair(biases, 4);
  const StateVector phi{0.1, 0.2, 0.3, 0.4};

  SUBCASE("pure exploitation takes the best available action") {
    ActionSet all;
    for (int i = 0; i < kActionCount; ++i) all.insert(static_cast<Action>(i));
    Rng rng(2);
    CHECK(select_action(pair, phi, all, 0.0, rng) == Action::North);
  }

  SUBCASE("the globally best action is skipped when unavailable") {
    ActionSet corner;  // Stay, N, E, NE as at a southwest corner
    corner.insert(Action::Stay);
    corner.insert(Action::East);
    corner.insert(Action::NorthEast);
    Rng rng(3);
    // North (0.9) is masked; NorthEast (0.6) beats East (0.4) and Stay (0.1).
    CHECK(select_action(pair, phi, corner, 0.0, rng) == Action::NorthEast);
  }

  SUBCASE("full exploration draws uniformly over the available set") {
    ActionSet corner;
    corner.insert(Action::Stay);
    corner.insert(Action::North);
    corner.insert(Action::East);
    corner.insert(Action::NorthEast);
    Rng rng(4);
    int counts[kActionCount] = {};
    const int draws = 10000;
    for (int k = 0; k < draws; ++k)
      ++counts[static_cast<int>(select_action(pair, phi, corner, 1.0, rng))];
    for (Action a : corner.to_vector()) {
      const double freq = counts[static_cast<int>(a)] / static_cast<double>(draws);
      CHECK(std::abs(freq - 0.25) < 0.05);
    }
    CHECK(counts[static_cast<int>(Action::South)] == 0);
  }

  SUBCASE("empty set is rejected") {
    Rng rng(5);
    CHECK_THROWS_AS(select_action(pair, phi, ActionSet{}, 0.5, rng),
                    std::invalid_argument);
  }
}

TEST_CASE("target computation") {
  Eigen::VectorXd biases(3);
  biases << 2.0, -1.0, 7.0;
  const QNetworkPair pair = constant_q_pair(biases, 2);

  ExperienceTuple e;
  e.phi_prev = {0.0, 0.0};
  e.phi_next = {0.5, 0.5};
  e.reward = 1.0;
  e.next_available.insert(Action::Stay);   // Q = 2.0
  e.next_available.insert(Action::North);  // Q = -1.0

  const std::vector<const ExperienceTuple*> batch{&e};

  SUBCASE("discounted bootstrap over the available actions only") {
    // max available is 2.0, not the global 7.0.
    const Eigen::VectorXd y = compute_targets(batch, pair.target_net, 0.9);
    CHECK(y(0) == doctest::Approx(1.0 + 0.9 * 2.0).epsilon(1e-12));
  }
  SUBCASE("zero discount reduces to the reward") {
    const Eigen::VectorXd y = compute_targets(batch, pair.target_net, 0.0);
    CHECK(y(0) == 1.0);
  }
  SUBCASE("default discount is 0.9") {
    CHECK(DqnConfig{}.discount == 0.9);
  }
}

TEST_CASE("target network freezes between syncs") {
  Rng rng(6);
  QNetworkPair pair{Mlp::init({3, {8}, 9}, rng), Mlp(), 0};
  sync_target(pair);

  Eigen::MatrixXd probe(2, 3);
  probe << 0.1, 0.2, 0.3, 0.4, 0.5, 0.6;
  CHECK(pair.q_net.infer(probe) == pair.target_net.infer(probe));

  ExperienceTuple e;
  e.phi_prev = {0.2, 0.4, 0.6};
  e.phi_next = {0.1, 0.3, 0.5};
  e.reward = 0.5;
  e.next_available.insert(Action::Stay);
  const std::vector<const ExperienceTuple*> batch{&e};
  const Eigen::VectorXd before = compute_targets(batch, pair.target_net, 0.9);

  // Several q-network updates must not move the targets.
  Eigen::MatrixXd train_batch(4, 3);
  train_batch.setConstant(0.25);
  const std::vector<int> actions{0, 1, 2, 3};
  for (int k = 0; k < 5; ++k) {
    const LossResult r = mse_loss_and_grad(pair.q_net, train_batch, actions,
                                           Eigen::VectorXd::Ones(4));
    sgd_update(pair.q_net, r.grads, SgdConfig{0.05});
  }
  CHECK(pair.q_net.infer(probe) != pair.target_net.infer(probe));
  CHECK(compute_targets(batch, pair.target_net, 0.9) == before);

  sync_target(pair);
  CHECK(pair.q_net.infer(probe) == pair.target_net.infer(probe));
  CHECK(pair.steps_since_sync == 0);
}

TEST_CASE("training loop bookkeeping on a tiny world") {
  TinyWorld world;
  const auto dataset = world.make_dataset(12, 40, 900);

  DqnConfig cfg;
  cfg.replay_capacity = 600;
  cfg.replay_start = 100;
  cfg.minibatch = 16;
  cfg.sync_period = 50;
  cfg.hidden_dims = {12};
  cfg.sgd.learning_rate = 0.01;

  const DqnTrainResult result = train_dqn(dataset, world.map, world.gws,
                                          world.reward, world.features, cfg,
                                          11, 22);

  CHECK(result.log.episode_returns.size() == 12);
  REQUIRE_FALSE(result.log.updates.empty());

  // Tuples accumulate one per step except each episode's first step, so the
  // first update lands exactly when the replay reaches the start size.
  long expected_first = -1;
  long tuples = 0;
  for (int e = 0; e < 12 && expected_first < 0; ++e)
    for (int t = 0; t < 40; ++t)
      if (t > 0 && ++tuples >= static_cast<long>(cfg.replay_start)) {
        expected_first = e * 40 + t;
        break;
      }
  CHECK(result.log.updates.front().step == expected_first);

  long prev_step = -1;
  for (const TrainingStepRecord& rec : result.log.updates) {
    CHECK(rec.step > prev_step);
    prev_step = rec.step;
    CHECK(std::isfinite(rec.loss));
    CHECK(rec.epsilon <= cfg.epsilon_initial);
    CHECK(rec.epsilon >= cfg.epsilon_final);
  }

  SUBCASE("training is bitwise deterministic") {
    const DqnTrainResult again = train_dqn(dataset, world.map, world.gws,
                                           world.reward, world.features, cfg,
                                           11, 22);
    Mlp a = result.pair.q_net;
    Mlp b = again.pair.q_net;
    const auto pa = gridloc::testing::parameter_pointers(a);
    const auto pb = gridloc::testing::parameter_pointers(b);
    REQUIRE(pa.size() == pb.size());
    for (std::size_t i = 0; i < pa.size(); ++i) CHECK(*pa[i] == *pb[i]);
    REQUIRE(again.log.updates.size() == result.log.updates.size());
    for (std::size_t i = 0; i < result.log.updates.size(); ++i)
      CHECK(again.log.updates[i].loss == result.log.updates[i].loss);
  }

  SUBCASE("empty dataset is rejected") {
    CHECK_THROWS_AS(train_dqn({}, world.map, world.gws, world.reward,
                              world.features, cfg, 1, 2),
                    std::invalid_argument);
  }

  SUBCASE("an absurd learning rate triggers the divergence guard") {
    DqnConfig hot = cfg;
    hot.sgd.learning_rate = 1e250;
    CHECK_THROWS_WITH_AS(train_dqn(dataset, world.map, world.gws, world.reward,
                                   world.features, hot, 11, 22),
                         "training diverged", std::runtime_error);
  }
}

TEST_CASE("greedy localization is a pure fixed-length rollout") {
  TinyWorld world;
  const auto dataset = world.make_dataset(1, 25, 901);

  Rng rng(7);
  QNetworkPair pair{Mlp::init({3, {8}, 9}, rng), Mlp(), 0};
  sync_target(pair);

  const auto estimates = localize_trajectory(pair, dataset[0].rss_seq,
                                             world.map, world.features,
                                             world.map.cell(0, 0));
  CHECK(estimates.size() == 25);
  for (const CellIndex& c : estimates)
    CHECK(world.map.contains(c.row(), c.col()));

  const auto again = localize_trajectory(pair, dataset[0].rss_seq, world.map,
                                         world.features, world.map.cell(0, 0));
  CHECK(estimates == again);
}

TEST_CASE("value-iteration oracle sanity at zero discount") {
  // With gamma = 0 the optimal action simply maximizes the expected
  // immediate reward, which is largest on the gateway cell itself.
  TinyWorld world;
  const gridloc::testing::TabularOracle oracle(
      world.map, world.gws, world.params, world.reward, -100.0, 0.0);

  const int center = world.map.cell_id(world.map.cell(1, 1));
  const auto from_corner =
      oracle.unique_greedy(world.map.cell_id(world.map.cell(0, 0)), center);
  REQUIRE(from_corner.has_value());
  CHECK(*from_corner == Action::NorthEast);

  const auto from_edge =
      oracle.unique_greedy(world.map.cell_id(world.map.cell(0, 1)), center);
  REQUIRE(from_edge.has_value());
  CHECK(*from_edge == Action::North);

  const auto at_center = oracle.unique_greedy(center, center);
  REQUIRE(at_center.has_value());
  CHECK(*at_center == Action::Stay);
}

}  // TEST_SUITE
