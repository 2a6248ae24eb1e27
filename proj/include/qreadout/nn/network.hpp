#pragma once

// Dense feed-forward networks with hand-written backpropagation.
// Samples are stored as matrix columns throughout.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qreadout/rng.hpp"

namespace qreadout::nn {

enum class Activation { sigmoid, tanh, softmax, linear };

std::string to_string(Activation a);
Activation parse_activation(const std::string& name);

struct LayerSpec {
  std::size_t in_dim = 0;
  std::size_t out_dim = 0;
  Activation activation = Activation::linear;

  bool operator==(const LayerSpec&) const = default;
};

enum class LossKind { mse, cross_entropy };

/// Parameter-shaped container; also used for gradients and Adam moments.
struct Gradients {
  std::vector<Eigen::MatrixXd> weights;  // out x in
  std::vector<Eigen::VectorXd> biases;   // out

  double max_abs() const;
};

struct ForwardPass {
  Eigen::VectorXd output;
  /// activations[0] is the input; activations[l + 1] is the output of layer l.
  std::vector<Eigen::VectorXd> activations;
};

class DenseNetwork {
 public:
  DenseNetwork() = default;
  /// All parameters zero. Throws UsageError if dimensions do not chain or a
  /// softmax layer is not last.
  explicit DenseNetwork(std::vector<LayerSpec> layers);

  /// Glorot-uniform weights on +-sqrt(6 / (in + out)), zero biases.
  static DenseNetwork glorot(std::vector<LayerSpec> layers, Rng& rng);

  const std::vector<LayerSpec>& layers() const { return layers_; }
  std::size_t depth() const { return layers_.size(); }
  std::size_t input_dim() const;
  std::size_t output_dim() const;
  std::size_t parameter_count() const;
  std::vector<std::size_t> widths() const;

  Eigen::MatrixXd& weights(std::size_t l) { return weights_.at(l); }
  const Eigen::MatrixXd& weights(std::size_t l) const { return weights_.at(l); }
  Eigen::VectorXd& biases(std::size_t l) { return biases_.at(l); }
  const Eigen::VectorXd& biases(std::size_t l) const { return biases_.at(l); }

  ForwardPass forward(const Eigen::VectorXd& x) const;
  Eigen::VectorXd predict(const Eigen::VectorXd& x) const;
  /// Columns in, columns out.
  Eigen::MatrixXd predict_batch(const Eigen::MatrixXd& inputs) const;

  /// Layers [first, last) as a standalone network.
  DenseNetwork slice(std::size_t first, std::size_t last) const;
  /// `front` followed by `back`; dims must chain.
  static DenseNetwork concat(const DenseNetwork& front, const DenseNetwork& back);

  /// Zero-valued gradient container of this network's shape.
  Gradients zero_gradients() const;

  /// Flat view order: W0 (row-major), b0, W1, b1, ...
  std::vector<double> flat_parameters() const;
  void set_flat_parameters(std::span<const double> values);

  bool all_finite() const;
  bool operator==(const DenseNetwork& other) const;

 private:
  void check_input(Eigen::Index rows) const;

  std::vector<LayerSpec> layers_;
  std::vector<Eigen::MatrixXd> weights_;
  std::vector<Eigen::VectorXd> biases_;
};

/// Applies the activation column-wise in place.
void activate(Activation a, Eigen::MatrixXd& z);

struct BatchGradient {
  double loss = 0.0;
  Gradients grads;
};

/// Mean batch loss and its exact gradient. For cross-entropy the last layer
/// must be softmax and the output delta is fused to (y_hat - y).
/// mse with a softmax output is rejected.
BatchGradient backprop(const DenseNetwork& net, const Eigen::MatrixXd& inputs,
                       const Eigen::MatrixXd& targets, LossKind loss);

/// Mean batch loss without gradients.
double batch_loss(const DenseNetwork& net, const Eigen::MatrixXd& inputs,
                  const Eigen::MatrixXd& targets, LossKind loss);

/// Worst relative deviation between backprop and central differences over
/// every parameter, for a single (input, target) sample. The relative error
/// of one parameter is |a - n| / max(|a|, |n|, 1e-3).
double grad_check(const DenseNetwork& net, const Eigen::VectorXd& input,
                  const Eigen::VectorXd& target, LossKind loss, double epsilon = 1e-5);

/// Same as grad_check over a batch of columns.
double grad_check_batch(const DenseNetwork& net, const Eigen::MatrixXd& inputs,
                        const Eigen::MatrixXd& targets, LossKind loss, double epsilon = 1e-5);

}  // namespace qreadout::nn
