#pragma once

// Finite-difference gradient oracle for the MLP. Independent of the
// backpropagation path: every parameter is perturbed centrally on a fresh
// copy of the network and the loss is re-evaluated through the public API.

#include <cmath>
#include <functional>
#include <vector>

#include "gridloc/mlp.hpp"

namespace gridloc::testing {

// Pointers to every trainable parameter in declaration order (dense weights
// row-major, then biases, gamma, beta per block; output layer last).
inline std::vector<double*> parameter_pointers(Mlp& net) {
  std::vector<double*> ptrs;
  auto add_matrix = [&ptrs](Eigen::MatrixXd& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = 0; j < m.cols(); ++j) ptrs.push_back(&m(i, j));
  };
  auto add_vector = [&ptrs](Eigen::VectorXd& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) ptrs.push_back(&v(i));
  };
  for (std::size_t b = 0; b < net.block_count(); ++b) {
    add_matrix(net.block(b).dense.weights);
    add_vector(net.block(b).dense.biases);
    add_vector(net.block(b).norm.gamma);
    add_vector(net.block(b).norm.beta);
  }
  add_matrix(net.output_layer().weights);
  add_vector(net.output_layer().biases);
  return ptrs;
}

// Analytic gradients flattened in the same order as parameter_pointers.
inline std::vector<double> flatten_gradients(const MlpGradients& grads) {
  std::vector<double> flat;
  auto add_matrix = [&flat](const Eigen::MatrixXd& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      for (Eigen::Index j = 0; j < m.cols(); ++j) flat.push_back(m(i, j));
  };
  auto add_vector = [&flat](const Eigen::VectorXd& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) flat.push_back(v(i));
  };
  for (const auto& block : grads.blocks) {
    add_matrix(block.weights);
    add_vector(block.biases);
    add_vector(block.gamma);
    add_vector(block.beta);
  }
  add_matrix(grads.out_weights);
  add_vector(grads.out_biases);
  return flat;
}

// Maximum relative error between `analytic` and central finite differences
// of `loss_at` (which must evaluate the same loss the analytic gradients
// came from) at perturbation h.
inline double max_gradient_rel_error(
    const Mlp& net, const MlpGradients& analytic,
    const std::function<double(Mlp&)>& loss_at, double h = 1e-5) {
  const std::vector<double> flat = flatten_gradients(analytic);
  double worst = 0.0;
  for (std::size_t k = 0; k < flat.size(); ++k) {
    Mlp plus = net;
    *parameter_pointers(plus)[k] += h;
    const double loss_plus = loss_at(plus);

    Mlp minus = net;
    *parameter_pointers(minus)[k] -= h;
    const double loss_minus = loss_at(minus);

    const double fd = (loss_plus - loss_minus) / (2.0 * h);
    const double scale = std::max({1.0, std::abs(fd), std::abs(flat[k])});
    worst = std::max(worst, std::abs(fd - flat[k]) / scale);
  }
  return worst;
}

}  // namespace gridloc::testing
