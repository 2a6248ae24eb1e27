#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "qreadout/nn/network.hpp"

namespace qreadout::nn {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// Adam with bias-corrected moments:
///   m <- b1 m + (1 - b1) g,  v <- b2 v + (1 - b2) g^2
///   p <- p - lr * m_hat / (sqrt(v_hat) + eps)
/// Moments are stored flat, layer by layer, in each parameter block's storage order.
class AdamState {
 public:
  AdamState(std::size_t parameter_count, AdamConfig config = {});
  explicit AdamState(const DenseNetwork& net, AdamConfig config = {})
      : AdamState(net.parameter_count(), config) {}

  /// One update of a flat parameter vector.
  void step(std::span<double> params, std::span<const double> grads);
  /// One update of every layer of `net`.
  void step(DenseNetwork& net, const Gradients& grads);

  std::uint64_t step_count() const { return step_count_; }
  const std::vector<double>& first_moment() const { return m_; }
  const std::vector<double>& second_moment() const { return v_; }
  const AdamConfig& config() const { return config_; }

 private:
  void update_block(std::size_t offset, double* params, const double* grads, std::size_t n);

  AdamConfig config_;
  std::uint64_t step_count_ = 0;
  std::vector<double> m_;
  std::vector<double> v_;
  double correction1_ = 1.0;
  double correction2_ = 1.0;
};

}  // namespace qreadout::nn
