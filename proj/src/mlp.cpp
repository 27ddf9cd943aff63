#include "gridloc/mlp.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace gridloc {

namespace {

void check_dims(const MlpDims& dims) {
  if (dims.input < 1 || dims.output < 1)
    throw std::invalid_argument("network needs positive input/output widths");
  for (int h : dims.hidden)
    if (h < 1) throw std::invalid_argument("hidden widths must be positive");
}

Eigen::MatrixXd dense_forward(const DenseLayer& layer,
                              const Eigen::MatrixXd& x) {
  Eigen::MatrixXd y = x * layer.weights.transpose();
  y.rowwise() += layer.biases.transpose();
  return y;
}

}  // namespace

Mlp Mlp::init(const MlpDims& dims, Rng& rng) {
  check_dims(dims);
  Mlp net;
  net.dims_ = dims;

  auto init_dense = [&rng](int fan_out, int fan_in) {
    DenseLayer layer;
    layer.weights.resize(fan_out, fan_in);
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    for (int i = 0; i < fan_out; ++i)
      for (int j = 0; j < fan_in; ++j)
        layer.weights(i, j) = rng.uniform(-limit, limit);
    layer.biases = Eigen::VectorXd::Zero(fan_out);
    return layer;
  };

  int in = dims.input;
  for (int width : dims.hidden) {
    HiddenBlock block;
    block.dense = init_dense(width, in);
    block.norm.gamma = Eigen::VectorXd::Ones(width);
    block.norm.beta = Eigen::VectorXd::Zero(width);
    block.norm.running_mean = Eigen::VectorXd::Zero(width);
    block.norm.running_var = Eigen::VectorXd::Ones(width);
    net.blocks_.push_back(std::move(block));
    in = width;
  }
  net.output_ = init_dense(dims.output, in);
  return net;
}

Eigen::MatrixXd Mlp::infer(const Eigen::MatrixXd& batch) const {
  if (batch.cols() != dims_.input)
    throw std::invalid_argument("input width " + std::to_string(batch.cols()) +
                                " does not match network input " +
                                std::to_string(dims_.input));
  Eigen::MatrixXd x = batch;
  for (const HiddenBlock& block : blocks_) {
    x = dense_forward(block.dense, x);
    const auto& bn = block.norm;
    const Eigen::ArrayXd inv_std =
        (bn.running_var.array() + bn.epsilon).sqrt().inverse();
    x = (((x.rowwise() - bn.running_mean.transpose()).array().rowwise() *
          inv_std.transpose()) .rowwise() *
             bn.gamma.array().transpose())
            .matrix();
    x.rowwise() += bn.beta.transpose();
    x = x.cwiseMax(0.0);
  }
  return dense_forward(output_, x);
}

ForwardTrace Mlp::forward_train(const Eigen::MatrixXd& batch) {
  if (batch.cols() != dims_.input)
    throw std::invalid_argument("input width " + std::to_string(batch.cols()) +
                                " does not match network input " +
                                std::to_string(dims_.input));
  if (batch.rows() < 2)
    throw std::invalid_argument("degenerate batch statistics");

  const auto n = static_cast<double>(batch.rows());
  ForwardTrace trace;
  trace.input = batch;

  Eigen::MatrixXd x = batch;
  for (HiddenBlock& block : blocks_) {
    Eigen::MatrixXd z = dense_forward(block.dense, x);
    BatchNormLayer& bn = block.norm;

    const Eigen::VectorXd mean = z.colwise().mean();
    const Eigen::MatrixXd centered = z.rowwise() - mean.transpose();
    const Eigen::VectorXd var = centered.array().square().colwise().sum() / n;

    bn.running_mean = bn.momentum * bn.running_mean + (1.0 - bn.momentum) * mean;
    bn.running_var = bn.momentum * bn.running_var + (1.0 - bn.momentum) * var;

    const Eigen::ArrayXd inv_std = (var.array() + bn.epsilon).sqrt().inverse();
    Eigen::MatrixXd standardized =
        (centered.array().rowwise() * inv_std.transpose()).matrix();
    Eigen::MatrixXd normalized =
        (standardized.array().rowwise() * bn.gamma.array().transpose())
            .matrix();
    normalized.rowwise() += bn.beta.transpose();

    trace.linear.push_back(std::move(z));
    trace.batch_mean.push_back(mean);
    trace.batch_var.push_back(var);
    trace.standardized.push_back(std::move(standardized));
    trace.normalized.push_back(normalized);
    trace.activated.push_back(normalized.cwiseMax(0.0));
    x = trace.activated.back();
  }
  trace.output = dense_forward(output_, x);
  return trace;
}

namespace {

// Backpropagates d_output (N x out) through the traced forward pass.
MlpGradients backward(const Mlp& net, const ForwardTrace& trace,
                      const Eigen::MatrixXd& d_output) {
  const auto n = static_cast<double>(trace.input.rows());
  MlpGradients grads;
  grads.blocks.resize(net.block_count());

  const Eigen::MatrixXd& last_activation =
      net.block_count() > 0 ? trace.activated.back() : trace.input;
  grads.out_weights = d_output.transpose() * last_activation;
  grads.out_biases = d_output.colwise().sum();

  Eigen::MatrixXd dx = d_output * net.output_layer().weights;
  for (std::size_t bi = net.block_count(); bi-- > 0;) {
    const HiddenBlock& block = net.block(bi);
    const BatchNormLayer& bn = block.norm;

    // Through ReLU (derivative at exactly 0 is defined as 0).
    Eigen::MatrixXd d_norm =
        (dx.array() * (trace.normalized[bi].array() > 0.0).cast<double>())
            .matrix();

    // Batch-norm parameter gradients.
    grads.blocks[bi].gamma =
        (d_norm.array() * trace.standardized[bi].array()).colwise().sum();
    grads.blocks[bi].beta = d_norm.colwise().sum();

    // Through the batch-statistics normalization path.
    const Eigen::ArrayXd inv_std =
        (trace.batch_var[bi].array() + bn.epsilon).sqrt().inverse();
    const Eigen::MatrixXd d_std =
        (d_norm.array().rowwise() * bn.gamma.array().transpose()).matrix();
    const Eigen::MatrixXd centered =
        trace.linear[bi].rowwise() - trace.batch_mean[bi].transpose();

    const Eigen::ArrayXd d_var =
        (d_std.array() * centered.array()).colwise().sum().transpose() *
        (-0.5) * inv_std.pow(3);
    const Eigen::ArrayXd d_mean =
        d_std.array().colwise().sum().transpose() * -inv_std +
        d_var * (-2.0 / n) * centered.array().colwise().sum().transpose();

    Eigen::MatrixXd dz =
        (d_std.array().rowwise() * inv_std.transpose() +
         centered.array().rowwise() * (d_var.transpose() * 2.0 / n))
            .matrix();
    dz.array().rowwise() += d_mean.transpose() / n;

    const Eigen::MatrixXd& prev =
        bi > 0 ? trace.activated[bi - 1] : trace.input;
    grads.blocks[bi].weights = dz.transpose() * prev;
    grads.blocks[bi].biases = dz.colwise().sum();
    dx = dz * block.dense.weights;
  }
  return grads;
}

}  // namespace

LossResult mse_loss_and_grad(Mlp& net, const Eigen::MatrixXd& batch,
                             const std::vector<int>& actions,
                             const Eigen::VectorXd& targets) {
  const auto n = batch.rows();
  if (static_cast<Eigen::Index>(actions.size()) != n || targets.size() != n)
    throw std::invalid_argument("batch, actions, and targets must align");

  ForwardTrace trace = net.forward_train(batch);
  Eigen::MatrixXd d_output =
      Eigen::MatrixXd::Zero(trace.output.rows(), trace.output.cols());

  double loss = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    if (actions[j] < 0 || actions[j] >= trace.output.cols())
      throw std::invalid_argument("action index outside output width");
    const double diff = trace.output(j, actions[j]) - targets(j);
    loss += diff * diff;
    d_output(j, actions[j]) = 2.0 * diff / static_cast<double>(n);
  }
  loss /= static_cast<double>(n);
  return {loss, backward(net, trace, d_output)};
}

LossResult softmax_ce_loss_and_grad(Mlp& net, const Eigen::MatrixXd& batch,
                                    const std::vector<int>& labels) {
  const auto n = batch.rows();
  if (static_cast<Eigen::Index>(labels.size()) != n)
    throw std::invalid_argument("batch and labels must align");

  ForwardTrace trace = net.forward_train(batch);
  Eigen::MatrixXd probs = trace.output;
  for (Eigen::Index j = 0; j < n; ++j) {
    const double m = probs.row(j).maxCoeff();
    probs.row(j) = (probs.row(j).array() - m).exp();
    probs.row(j) /= probs.row(j).sum();
  }

  double loss = 0.0;
  Eigen::MatrixXd d_output = probs / static_cast<double>(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    if (labels[j] < 0 || labels[j] >= trace.output.cols())
      throw std::invalid_argument("label outside output width");
    loss -= std::log(std::max(probs(j, labels[j]), 1e-300));
    d_output(j, labels[j]) -= 1.0 / static_cast<double>(n);
  }
  loss /= static_cast<double>(n);
  return {loss, backward(net, trace, d_output)};
}

void sgd_update(Mlp& net, const MlpGradients& grads, const SgdConfig& cfg) {
  if (grads.blocks.size() != net.block_count())
    throw std::invalid_argument("gradient/parameter block count mismatch");
  auto check = [](const auto& p, const auto& g) {
    if (p.rows() != g.rows() || p.cols() != g.cols())
      throw std::invalid_argument("gradient shape mismatch");
  };

  const double lr = cfg.learning_rate;
  for (std::size_t i = 0; i < net.block_count(); ++i) {
    HiddenBlock& block = net.block(i);
    const auto& g = grads.blocks[i];
    check(block.dense.weights, g.weights);
    check(block.dense.biases, g.biases);
    check(block.norm.gamma, g.gamma);
    check(block.norm.beta, g.beta);
    block.dense.weights -= lr * g.weights;
    block.dense.biases -= lr * g.biases;
    block.norm.gamma -= lr * g.gamma;
    block.norm.beta -= lr * g.beta;
  }
  check(net.output_layer().weights, grads.out_weights);
  check(net.output_layer().biases, grads.out_biases);
  net.output_layer().weights -= lr * grads.out_weights;
  net.output_layer().biases -= lr * grads.out_biases;
}

Eigen::VectorXd softmax(const Eigen::VectorXd& scores) {
  Eigen::ArrayXd shifted = scores.array() - scores.maxCoeff();
  Eigen::ArrayXd e = shifted.exp();
  return (e / e.sum()).matrix();
}

}  // namespace gridloc
