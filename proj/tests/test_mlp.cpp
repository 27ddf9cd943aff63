#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "gradient_check.hpp"
#include "gridloc/mlp.hpp"

using namespace gridloc;
using gridloc::testing::max_gradient_rel_error;
using gridloc::testing::parameter_pointers;

namespace {

Eigen::MatrixXd random_batch(int rows, int cols, Rng& rng) {
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = rng.uniform(-1.0, 1.0);
  return m;
}

}  // namespace

TEST_SUITE("mlp") {

TEST_CASE("zeroed network maps everything to zero") {
  Rng rng(1);
  Mlp net = Mlp::init({4, {6}, 3}, rng);
  net.block(0).dense.weights.setZero();
  net.block(0).norm.gamma.setZero();
  net.output_layer().weights.setZero();

  Rng batch_rng(2);
  const Eigen::MatrixXd batch = random_batch(5, 4, batch_rng);
  CHECK(net.infer(batch).isZero(0.0));
  CHECK(net.forward_train(batch).output.isZero(0.0));
}

TEST_CASE("train-mode batch norm standardizes each feature") {
  Rng rng(3);
  Mlp net = Mlp::init({5, {8}, 2}, rng);
  Rng batch_rng(4);
  const Eigen::MatrixXd batch = random_batch(64, 5, batch_rng);

  const ForwardTrace trace = net.forward_train(batch);
  const auto n = static_cast<double>(batch.rows());
  for (int f = 0; f < 8; ++f) {
    const Eigen::VectorXd column = trace.standardized[0].col(f);
    const double mean = column.mean();
    const double var = (column.array() - mean).square().sum() / n;
    const double batch_var = trace.batch_var[0](f);
    CHECK(std::abs(mean) < 1e-12);
    // Standardizing with sqrt(var + eps) leaves variance var/(var + eps).
    CHECK(std::abs(var - batch_var / (batch_var + net.block(0).norm.epsilon)) <
          1e-6);
  }
  // gamma = 1, beta = 0 at init, so the normalized output is the
  // standardized one.
  CHECK(trace.normalized[0] == trace.standardized[0]);
}

TEST_CASE("inference is pure and repeatable") {
  Rng rng(5);
  Mlp net = Mlp::init({3, {4, 4}, 2}, rng);
  const Mlp snapshot = net;

  Rng batch_rng(6);
  const Eigen::MatrixXd batch = random_batch(7, 3, batch_rng);
  const Eigen::MatrixXd a = net.infer(batch);
  const Eigen::MatrixXd b = net.infer(batch);
  CHECK(a == b);
  CHECK(net.block(0).norm.running_mean == snapshot.block(0).norm.running_mean);
  CHECK(net.block(1).norm.running_var == snapshot.block(1).norm.running_var);

  // Train-mode forward does move the running statistics.
  net.forward_train(batch);
  CHECK(net.block(0).norm.running_mean != snapshot.block(0).norm.running_mean);
}

TEST_CASE("mse loss at the minimum is zero with zero gradients") {
  Rng rng(7);
  Mlp net = Mlp::init({4, {5}, 3}, rng);
  Rng batch_rng(8);
  const Eigen::MatrixXd batch = random_batch(6, 4, batch_rng);
  const std::vector<int> actions{0, 2, 1, 0, 2, 1};

  // Batch statistics depend only on the parameters, so a second train-mode
  // pass reproduces the same outputs; targets equal to them zero the loss.
  Eigen::VectorXd targets(6);
  const ForwardTrace probe = net.forward_train(batch);
  for (int j = 0; j < 6; ++j) targets(j) = probe.output(j, actions[j]);

  const LossResult result = mse_loss_and_grad(net, batch, actions, targets);
  CHECK(result.loss == 0.0);
  for (const auto& block : result.grads.blocks) {
    CHECK(block.weights.isZero(0.0));
    CHECK(block.biases.isZero(0.0));
    CHECK(block.gamma.isZero(0.0));
    CHECK(block.beta.isZero(0.0));
  }
  CHECK(result.grads.out_weights.isZero(0.0));
  CHECK(result.grads.out_biases.isZero(0.0));
}

TEST_CASE("mse loss arithmetic on a fixed head") {
  // No hidden blocks: output = biases. Selected output 2 vs target 3 on
  // both rows gives loss (3-2)^2 = 1.
  Rng rng(9);
  Mlp net = Mlp::init({2, {}, 2}, rng);
  net.output_layer().weights.setZero();
  net.output_layer().biases << 2.0, 0.5;

  Eigen::MatrixXd batch(2, 2);
  batch << 0.3, -0.1, 0.7, 0.2;
  const std::vector<int> actions{0, 0};
  Eigen::VectorXd targets(2);
  targets << 3.0, 3.0;

  const LossResult result = mse_loss_and_grad(net, batch, actions, targets);
  CHECK(result.loss == 1.0);
}

TEST_CASE("analytic gradients match finite differences") {
  Rng rng(10);

  SUBCASE("mse head") {
    for (int round = 0; round < 3; ++round) {
      Mlp net = Mlp::init({5, {8}, 3}, rng);
      const Eigen::MatrixXd batch = random_batch(4, 5, rng);
      std::vector<int> actions;
      Eigen::VectorXd targets(4);
      for (int j = 0; j < 4; ++j) {
        actions.push_back(static_cast<int>(rng.below(3)));
        targets(j) = rng.uniform(-1.0, 1.0);
      }
      Mlp probe = net;
      const MlpGradients analytic =
          mse_loss_and_grad(probe, batch, actions, targets).grads;
      const double err = max_gradient_rel_error(
          net, analytic,
          [&](Mlp& m) { return mse_loss_and_grad(m, batch, actions, targets).loss; });
      CHECK(err < 1e-4);
    }
  }

  SUBCASE("softmax cross-entropy head") {
    for (int round = 0; round < 3; ++round) {
      Mlp net = Mlp::init({4, {6}, 5}, rng);
      const Eigen::MatrixXd batch = random_batch(4, 4, rng);
      std::vector<int> labels;
      for (int j = 0; j < 4; ++j) labels.push_back(static_cast<int>(rng.below(5)));
      Mlp probe = net;
      const MlpGradients analytic =
          softmax_ce_loss_and_grad(probe, batch, labels).grads;
      const double err = max_gradient_rel_error(
          net, analytic,
          [&](Mlp& m) { return softmax_ce_loss_and_grad(m, batch, labels).loss; });
      CHECK(err < 1e-4);
    }
  }

  SUBCASE("two hidden blocks") {
    Mlp net = Mlp::init({3, {5, 4}, 2}, rng);
    const Eigen::MatrixXd batch = random_batch(6, 3, rng);
    std::vector<int> actions;
    Eigen::VectorXd targets(6);
    for (int j = 0; j < 6; ++j) {
      actions.push_back(static_cast<int>(rng.below(2)));
      targets(j) = rng.uniform(-2.0, 2.0);
    }
    Mlp probe = net;
    const MlpGradients analytic =
        mse_loss_and_grad(probe, batch, actions, targets).grads;
    const double err = max_gradient_rel_error(
        net, analytic,
        [&](Mlp& m) { return mse_loss_and_grad(m, batch, actions, targets).loss; });
    CHECK(err < 1e-4);
  }
}

TEST_CASE("sgd update") {
  SUBCASE("learning-rate arithmetic") {
    Rng rng(11);
    Mlp net = Mlp::init({1, {}, 1}, rng);
    net.output_layer().weights(0, 0) = 1.0;

    MlpGradients grads;
    grads.out_weights = Eigen::MatrixXd::Constant(1, 1, 2.0);
    grads.out_biases = Eigen::VectorXd::Zero(1);
    sgd_update(net, grads, SgdConfig{0.001});
    CHECK(net.output_layer().weights(0, 0) == 0.998);
  }

  SUBCASE("zero gradients are a fixed point and +g/-g round-trips") {
    Rng rng(12);
    Mlp net = Mlp::init({3, {4}, 2}, rng);
    const Mlp before = net;

    const Eigen::MatrixXd batch = random_batch(4, 3, rng);
    std::vector<int> actions{0, 1, 0, 1};
    Eigen::VectorXd targets = Eigen::VectorXd::Zero(4);
    Mlp probe = net;
    MlpGradients grads = mse_loss_and_grad(probe, batch, actions, targets).grads;

    MlpGradients zero = grads;
    for (auto& block : zero.blocks) {
      block.weights.setZero();
      block.biases.setZero();
      block.gamma.setZero();
      block.beta.setZero();
    }
    zero.out_weights.setZero();
    zero.out_biases.setZero();
    sgd_update(net, zero, SgdConfig{0.5});
    CHECK(net.output_layer().weights == before.output_layer().weights);
    CHECK(net.block(0).dense.weights == before.block(0).dense.weights);

    sgd_update(net, grads, SgdConfig{0.01});
    MlpGradients negated = grads;
    for (auto& block : negated.blocks) {
      block.weights *= -1.0;
      block.biases *= -1.0;
      block.gamma *= -1.0;
      block.beta *= -1.0;
    }
    negated.out_weights *= -1.0;
    negated.out_biases *= -1.0;
    sgd_update(net, negated, SgdConfig{0.01});
    CHECK(net.output_layer().weights.isApprox(before.output_layer().weights, 1e-12));
    CHECK(net.block(0).dense.weights.isApprox(before.block(0).dense.weights, 1e-12));
  }

  SUBCASE("shape mismatch is rejected") {
    Rng rng(13);
    Mlp net = Mlp::init({2, {3}, 2}, rng);
    MlpGradients grads;
    CHECK_THROWS_AS(sgd_update(net, grads, SgdConfig{}), std::invalid_argument);
  }
}

TEST_CASE("copies are deep and independent") {
  Rng rng(14);
  Mlp source = Mlp::init({3, {4}, 2}, rng);
  const Mlp clone = source;

  Rng batch_rng(15);
  const Eigen::MatrixXd batch = random_batch(5, 3, batch_rng);
  CHECK(source.infer(batch) == clone.infer(batch));

  // Mutating the source leaves the clone untouched, running stats included.
  source.forward_train(batch);
  source.block(0).dense.weights(0, 0) += 1.0;
  CHECK(clone.block(0).dense.weights(0, 0) != source.block(0).dense.weights(0, 0));
  CHECK(clone.block(0).norm.running_mean != source.block(0).norm.running_mean);

  const Mlp clone2 = clone;
  CHECK(clone2.infer(batch) == clone.infer(batch));
}

TEST_CASE("initialization scheme") {
  Rng rng(16);
  Mlp net = Mlp::init({4, {4}, 2}, rng);

  const double limit = std::sqrt(6.0 / (4 + 4));
  CHECK(net.block(0).dense.weights.cwiseAbs().maxCoeff() <= limit);
  CHECK(net.block(0).dense.biases.isZero(0.0));
  CHECK(net.output_layer().biases.isZero(0.0));
  CHECK(net.block(0).norm.gamma == Eigen::VectorXd::Ones(4));
  CHECK(net.block(0).norm.beta == Eigen::VectorXd::Zero(4));
  CHECK(net.block(0).norm.running_mean == Eigen::VectorXd::Zero(4));
  CHECK(net.block(0).norm.running_var == Eigen::VectorXd::Ones(4));

  Rng rng_a(17), rng_b(17);
  Mlp a = Mlp::init({5, {6, 7}, 3}, rng_a);
  Mlp b = Mlp::init({5, {6, 7}, 3}, rng_b);
  CHECK(a.block(0).dense.weights == b.block(0).dense.weights);
  CHECK(a.block(1).dense.weights == b.block(1).dense.weights);
  CHECK(a.output_layer().weights == b.output_layer().weights);
}

TEST_CASE("running statistics approach a fixed batch geometrically") {
  Rng rng(18);
  Mlp net = Mlp::init({3, {4}, 2}, rng);
  Rng batch_rng(19);
  const Eigen::MatrixXd batch = random_batch(32, 3, batch_rng);

  const ForwardTrace first = net.forward_train(batch);
  const Eigen::VectorXd target_mean = first.batch_mean[0];
  const double momentum = net.block(0).norm.momentum;

  double prev_gap =
      (net.block(0).norm.running_mean - target_mean).cwiseAbs().maxCoeff();
  for (int k = 0; k < 5; ++k) {
    net.forward_train(batch);
    const double gap =
        (net.block(0).norm.running_mean - target_mean).cwiseAbs().maxCoeff();
    CHECK(gap == doctest::Approx(momentum * prev_gap).epsilon(1e-9));
    prev_gap = gap;
  }
}

TEST_CASE("input validation") {
  Rng rng(20);
  Mlp net = Mlp::init({3, {4}, 2}, rng);

  const Eigen::MatrixXd wrong = Eigen::MatrixXd::Zero(2, 5);
  CHECK_THROWS_AS(net.infer(wrong), std::invalid_argument);
  CHECK_THROWS_AS(net.forward_train(wrong), std::invalid_argument);

  const Eigen::MatrixXd single = Eigen::MatrixXd::Zero(1, 3);
  CHECK_THROWS_WITH_AS(net.forward_train(single), "degenerate batch statistics",
                       std::invalid_argument);

  const Eigen::MatrixXd batch = Eigen::MatrixXd::Zero(3, 3);
  CHECK_THROWS_AS(
      mse_loss_and_grad(net, batch, {0, 1}, Eigen::VectorXd::Zero(3)),
      std::invalid_argument);
}

TEST_CASE("softmax rows are valid distributions") {
  Rng rng(21);
  for (int k = 0; k < 50; ++k) {
    Eigen::VectorXd scores(6);
    for (int i = 0; i < 6; ++i) scores(i) = rng.uniform(-30.0, 30.0);
    const Eigen::VectorXd p = softmax(scores);
    CHECK(p.minCoeff() >= 0.0);
    CHECK(std::abs(p.sum() - 1.0) < 1e-9);
  }
}

}  // TEST_SUITE
