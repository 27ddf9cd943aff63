#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <vector>

#include "gridloc/rng.hpp"

namespace gridloc {

struct DenseLayer {
  Eigen::MatrixXd weights;  // out x in
  Eigen::VectorXd biases;   // out
};

struct BatchNormLayer {
  Eigen::VectorXd gamma;
  Eigen::VectorXd beta;
  Eigen::VectorXd running_mean;
  Eigen::VectorXd running_var;
  double momentum = 0.99;
  double epsilon = 1e-5;
};

struct HiddenBlock {
  DenseLayer dense;
  BatchNormLayer norm;
};

struct MlpDims {
  int input = 0;
  std::vector<int> hidden;
  int output = 0;

  bool operator==(const MlpDims&) const = default;
};

// Per-block intermediates from a train-mode forward pass; consumed by
// backpropagation and by tests that inspect normalization behavior.
struct ForwardTrace {
  Eigen::MatrixXd input;                       // N x input
  std::vector<Eigen::MatrixXd> linear;         // dense output, pre-norm
  std::vector<Eigen::MatrixXd> standardized;   // (x - mean) / sqrt(var + eps)
  std::vector<Eigen::MatrixXd> normalized;     // gamma * standardized + beta
  std::vector<Eigen::MatrixXd> activated;      // relu(normalized)
  std::vector<Eigen::VectorXd> batch_mean;
  std::vector<Eigen::VectorXd> batch_var;      // biased (1/N)
  Eigen::MatrixXd output;                      // N x output
};

// Multilayer perceptron: hidden blocks of dense -> batch norm -> relu, then
// a linear output layer. All parameters and arithmetic are double precision.
// Copies are deep; a copied network is fully independent of its source.
class Mlp {
 public:
  Mlp() = default;

  // Dense weights ~ U(-sqrt(6/(fan_in+fan_out)), +sqrt(...)), drawn
  // row-major per layer in declaration order; biases zero; batch norm at
  // identity with zeroed running statistics.
  static Mlp init(const MlpDims& dims, Rng& rng);

  const MlpDims& dims() const { return dims_; }
  std::size_t block_count() const { return blocks_.size(); }
  const HiddenBlock& block(std::size_t i) const { return blocks_[i]; }
  HiddenBlock& block(std::size_t i) { return blocks_[i]; }
  const DenseLayer& output_layer() const { return output_; }
  DenseLayer& output_layer() { return output_; }

  // Inference: running statistics, mutates nothing. Rows of `batch` are
  // samples. Throws on input-width mismatch.
  Eigen::MatrixXd infer(const Eigen::MatrixXd& batch) const;

  // Training forward: normalizes with batch statistics and folds them into
  // the running statistics. Requires batch size >= 2 ("degenerate batch
  // statistics" otherwise).
  ForwardTrace forward_train(const Eigen::MatrixXd& batch);

 private:
  MlpDims dims_;
  std::vector<HiddenBlock> blocks_;
  DenseLayer output_;
};

struct MlpGradients {
  struct Block {
    Eigen::MatrixXd weights;
    Eigen::VectorXd biases;
    Eigen::VectorXd gamma;
    Eigen::VectorXd beta;
  };
  std::vector<Block> blocks;
  Eigen::MatrixXd out_weights;
  Eigen::VectorXd out_biases;
};

struct SgdConfig {
  double learning_rate = 0.001;
};

struct LossResult {
  double loss = 0.0;
  MlpGradients grads;
};

// Mean squared error between targets and the output of the taken action
// only: mean_j (targets_j - q_j[actions_j])^2. Non-selected outputs receive
// zero gradient. Runs a train-mode forward pass.
LossResult mse_loss_and_grad(Mlp& net, const Eigen::MatrixXd& batch,
                             const std::vector<int>& actions,
                             const Eigen::VectorXd& targets);

// Softmax cross-entropy against integer class labels (classifier head).
LossResult softmax_ce_loss_and_grad(Mlp& net, const Eigen::MatrixXd& batch,
                                    const std::vector<int>& labels);

// p <- p - learning_rate * g for every parameter; running statistics are
// not touched. Throws on shape mismatch.
void sgd_update(Mlp& net, const MlpGradients& grads, const SgdConfig& cfg);

Eigen::VectorXd softmax(const Eigen::VectorXd& scores);

}  // namespace gridloc
