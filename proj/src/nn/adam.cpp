#include "qreadout/nn/adam.hpp"

#include <cmath>

#include "qreadout/errors.hpp"

namespace qreadout::nn {

AdamState::AdamState(std::size_t parameter_count, AdamConfig config)
    : config_(config), m_(parameter_count, 0.0), v_(parameter_count, 0.0) {
  if (!(config.beta1 >= 0.0 && config.beta1 < 1.0 && config.beta2 >= 0.0 && config.beta2 < 1.0)) {
    throw UsageError("Adam: betas must lie in [0, 1)");
  }
}

void AdamState::update_block(std::size_t offset, double* params, const double* grads,
                             std::size_t n) {
  const double b1 = config_.beta1;
  const double b2 = config_.beta2;
  const double lr = config_.lr;
  const double eps = config_.epsilon;
  double* m = m_.data() + offset;
  double* v = v_.data() + offset;
  for (std::size_t k = 0; k < n; ++k) {
    const double g = grads[k];
    m[k] = b1 * m[k] + (1.0 - b1) * g;
    v[k] = b2 * v[k] + (1.0 - b2) * g * g;
    const double m_hat = m[k] / correction1_;
    const double v_hat = v[k] / correction2_;
    params[k] -= lr * m_hat / (std::sqrt(v_hat) + eps);
  }
}

void AdamState::step(std::span<double> params, std::span<const double> grads) {
  if (params.size() != m_.size() || grads.size() != m_.size()) {
    throw UsageError("Adam: parameter/gradient shape mismatch");
  }
  ++step_count_;
  correction1_ = 1.0 - std::pow(config_.beta1, static_cast<double>(step_count_));
  correction2_ = 1.0 - std::pow(config_.beta2, static_cast<double>(step_count_));
  update_block(0, params.data(), grads.data(), params.size());
}

void AdamState::step(DenseNetwork& net, const Gradients& grads) {
  if (net.parameter_count() != m_.size() || grads.weights.size() != net.depth() ||
      grads.biases.size() != net.depth()) {
    throw UsageError("Adam: parameter/gradient shape mismatch");
  }
  ++step_count_;
  correction1_ = 1.0 - std::pow(config_.beta1, static_cast<double>(step_count_));
  correction2_ = 1.0 - std::pow(config_.beta2, static_cast<double>(step_count_));
  std::size_t offset = 0;
  for (std::size_t l = 0; l < net.depth(); ++l) {
    Eigen::MatrixXd& w = net.weights(l);
    const Eigen::MatrixXd& gw = grads.weights[l];
    Eigen::VectorXd& b = net.biases(l);
    const Eigen::VectorXd& gb = grads.biases[l];
    if (gw.rows() != w.rows() || gw.cols() != w.cols() || gb.size() != b.size()) {
      throw UsageError("Adam: gradient shape mismatch");
    }
    update_block(offset, w.data(), gw.data(), static_cast<std::size_t>(w.size()));
    offset += static_cast<std::size_t>(w.size());
    update_block(offset, b.data(), gb.data(), static_cast<std::size_t>(b.size()));
    offset += static_cast<std::size_t>(b.size());
  }
}

}  // namespace qreadout::nn
