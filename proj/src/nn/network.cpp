#include "qreadout/nn/network.hpp"

#include <algorithm>
#include <cmath>

#include "qreadout/errors.hpp"
#include "qreadout/nn/loss.hpp"

namespace qreadout::nn {

std::string to_string(Activation a) {
  switch (a) {
    case Activation::sigmoid: return "sigmoid";
    case Activation::tanh: return "tanh";
    case Activation::softmax: return "softmax";
    case Activation::linear: return "linear";
  }
  return "?";
}

Activation parse_activation(const std::string& name) {
  if (name == "sigmoid") return Activation::sigmoid;
  if (name == "tanh") return Activation::tanh;
  if (name == "softmax") return Activation::softmax;
  if (name == "linear") return Activation::linear;
  throw DataError("unknown activation '" + name + "'");
}

double Gradients::max_abs() const {
  double m = 0.0;
  for (const auto& w : weights) m = std::max(m, w.cwiseAbs().maxCoeff());
  for (const auto& b : biases) m = std::max(m, b.cwiseAbs().maxCoeff());
  return m;
}

void activate(Activation a, Eigen::MatrixXd& z) {
  switch (a) {
    case Activation::sigmoid:
      z = (1.0 + (-z.array()).exp()).inverse().matrix();
      break;
    case Activation::tanh:
      z = z.array().tanh().matrix();
      break;
    case Activation::softmax:
      for (Eigen::Index c = 0; c < z.cols(); ++c) {
        auto col = z.col(c);
        const double peak = col.maxCoeff();
        col = (col.array() - peak).exp().matrix();
        col /= col.sum();
      }
      break;
    case Activation::linear:
      break;
  }
}

namespace {

// d(activation)/dz expressed through the activation output.
void scale_by_derivative(Activation a, const Eigen::MatrixXd& out, Eigen::MatrixXd& delta) {
  switch (a) {
    case Activation::sigmoid:
      delta.array() *= out.array() * (1.0 - out.array());
      break;
    case Activation::tanh:
      delta.array() *= 1.0 - out.array().square();
      break;
    case Activation::linear:
      break;
    case Activation::softmax:
      throw UsageError("softmax derivative is only available fused with cross-entropy");
  }
}

void validate_layers(const std::vector<LayerSpec>& layers) {
  if (layers.empty()) throw UsageError("DenseNetwork: no layers");
  for (std::size_t l = 0; l < layers.size(); ++l) {
    if (layers[l].in_dim == 0 || layers[l].out_dim == 0) {
      throw UsageError("DenseNetwork: layer dimensions must be >= 1");
    }
    if (l > 0 && layers[l].in_dim != layers[l - 1].out_dim) {
      throw UsageError("DenseNetwork: layer dimensions do not chain");
    }
    if (layers[l].activation == Activation::softmax && l + 1 != layers.size()) {
      throw UsageError("DenseNetwork: softmax is only allowed on the last layer");
    }
  }
}

std::vector<Eigen::MatrixXd> forward_all(const DenseNetwork& net, const Eigen::MatrixXd& inputs) {
  std::vector<Eigen::MatrixXd> acts;
  acts.reserve(net.depth() + 1);
  acts.push_back(inputs);
  for (std::size_t l = 0; l < net.depth(); ++l) {
    Eigen::MatrixXd z = net.weights(l) * acts.back();
    z.colwise() += net.biases(l);
    activate(net.layers()[l].activation, z);
    acts.push_back(std::move(z));
  }
  return acts;
}

double loss_from_output(const Eigen::MatrixXd& out, const Eigen::MatrixXd& targets, LossKind loss) {
  const auto batch = static_cast<double>(out.cols());
  if (loss == LossKind::mse) {
    return (out - targets).squaredNorm() / (static_cast<double>(out.rows()) * batch);
  }
  const Eigen::ArrayXXd logp = out.array().max(kProbabilityFloor).log();
  return -(targets.array() * logp).sum() / batch;
}

void check_targets(const DenseNetwork& net, const Eigen::MatrixXd& inputs,
                   const Eigen::MatrixXd& targets, LossKind loss) {
  if (static_cast<std::size_t>(inputs.rows()) != net.input_dim()) {
    throw UsageError("backprop: input dimension mismatch");
  }
  if (static_cast<std::size_t>(targets.rows()) != net.output_dim() ||
      targets.cols() != inputs.cols()) {
    throw UsageError("backprop: target dimension mismatch");
  }
  if (inputs.cols() == 0) throw UsageError("backprop: empty batch");
  const Activation last = net.layers().back().activation;
  if (loss == LossKind::cross_entropy && last != Activation::softmax) {
    throw UsageError("cross-entropy requires a softmax output layer");
  }
  if (loss == LossKind::mse && last == Activation::softmax) {
    throw UsageError("mse with a softmax output is not supported");
  }
}

}  // namespace

DenseNetwork::DenseNetwork(std::vector<LayerSpec> layers) : layers_(std::move(layers)) {
  validate_layers(layers_);
  for (const LayerSpec& spec : layers_) {
    weights_.push_back(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(spec.out_dim),
                                             static_cast<Eigen::Index>(spec.in_dim)));
    biases_.push_back(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(spec.out_dim)));
  }
}

DenseNetwork DenseNetwork::glorot(std::vector<LayerSpec> layers, Rng& rng) {
  DenseNetwork net(std::move(layers));
  for (std::size_t l = 0; l < net.depth(); ++l) {
    const LayerSpec& spec = net.layers_[l];
    const double limit = std::sqrt(6.0 / static_cast<double>(spec.in_dim + spec.out_dim));
    Eigen::MatrixXd& w = net.weights_[l];
    // Row-major fill so the draw order matches the serialized layout.
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = rng.uniform(-limit, limit);
    }
  }
  return net;
}

std::size_t DenseNetwork::input_dim() const { return layers_.empty() ? 0 : layers_.front().in_dim; }
std::size_t DenseNetwork::output_dim() const { return layers_.empty() ? 0 : layers_.back().out_dim; }

std::size_t DenseNetwork::parameter_count() const {
  std::size_t n = 0;
  for (const LayerSpec& s : layers_) n += s.out_dim * s.in_dim + s.out_dim;
  return n;
}

std::vector<std::size_t> DenseNetwork::widths() const {
  std::vector<std::size_t> w;
  if (layers_.empty()) return w;
  w.push_back(layers_.front().in_dim);
  for (const LayerSpec& s : layers_) w.push_back(s.out_dim);
  return w;
}

void DenseNetwork::check_input(Eigen::Index rows) const {
  if (static_cast<std::size_t>(rows) != input_dim()) {
    throw UsageError("DenseNetwork: input dimension " + std::to_string(rows) + " != " +
                     std::to_string(input_dim()));
  }
}

ForwardPass DenseNetwork::forward(const Eigen::VectorXd& x) const {
  check_input(x.size());
  ForwardPass pass;
  pass.activations.reserve(depth() + 1);
  pass.activations.push_back(x);
  for (std::size_t l = 0; l < depth(); ++l) {
    Eigen::MatrixXd z = weights_[l] * pass.activations.back() + biases_[l];
    activate(layers_[l].activation, z);
    pass.activations.emplace_back(z.col(0));
  }
  pass.output = pass.activations.back();
  return pass;
}

Eigen::VectorXd DenseNetwork::predict(const Eigen::VectorXd& x) const { return forward(x).output; }

Eigen::MatrixXd DenseNetwork::predict_batch(const Eigen::MatrixXd& inputs) const {
  check_input(inputs.rows());
  Eigen::MatrixXd a = inputs;
  for (std::size_t l = 0; l < depth(); ++l) {
    Eigen::MatrixXd z = weights_[l] * a;
    z.colwise() += biases_[l];
    activate(layers_[l].activation, z);
    a = std::move(z);
  }
  return a;
}

DenseNetwork DenseNetwork::slice(std::size_t first, std::size_t last) const {
  if (first >= last || last > depth()) throw UsageError("DenseNetwork::slice: bad range");
  DenseNetwork out(std::vector<LayerSpec>(layers_.begin() + static_cast<std::ptrdiff_t>(first),
                                          layers_.begin() + static_cast<std::ptrdiff_t>(last)));
  for (std::size_t l = first; l < last; ++l) {
    out.weights_[l - first] = weights_[l];
    out.biases_[l - first] = biases_[l];
  }
  return out;
}

DenseNetwork DenseNetwork::concat(const DenseNetwork& front, const DenseNetwork& back) {
  std::vector<LayerSpec> layers = front.layers_;
  layers.insert(layers.end(), back.layers_.begin(), back.layers_.end());
  DenseNetwork out(std::move(layers));
  for (std::size_t l = 0; l < front.depth(); ++l) {
    out.weights_[l] = front.weights_[l];
    out.biases_[l] = front.biases_[l];
  }
  for (std::size_t l = 0; l < back.depth(); ++l) {
    out.weights_[front.depth() + l] = back.weights_[l];
    out.biases_[front.depth() + l] = back.biases_[l];
  }
  return out;
}

Gradients DenseNetwork::zero_gradients() const {
  Gradients g;
  for (std::size_t l = 0; l < depth(); ++l) {
    g.weights.push_back(Eigen::MatrixXd::Zero(weights_[l].rows(), weights_[l].cols()));
    g.biases.push_back(Eigen::VectorXd::Zero(biases_[l].size()));
  }
  return g;
}

std::vector<double> DenseNetwork::flat_parameters() const {
  std::vector<double> flat;
  flat.reserve(parameter_count());
  for (std::size_t l = 0; l < depth(); ++l) {
    const Eigen::MatrixXd& w = weights_[l];
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) flat.push_back(w(r, c));
    }
    flat.insert(flat.end(), biases_[l].data(), biases_[l].data() + biases_[l].size());
  }
  return flat;
}

void DenseNetwork::set_flat_parameters(std::span<const double> values) {
  if (values.size() != parameter_count()) {
    throw DataError("parameter block has " + std::to_string(values.size()) + " values, expected " +
                    std::to_string(parameter_count()));
  }
  std::size_t k = 0;
  for (std::size_t l = 0; l < depth(); ++l) {
    Eigen::MatrixXd& w = weights_[l];
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = values[k++];
    }
    for (Eigen::Index r = 0; r < biases_[l].size(); ++r) biases_[l](r) = values[k++];
  }
}

bool DenseNetwork::all_finite() const {
  for (std::size_t l = 0; l < depth(); ++l) {
    if (!weights_[l].allFinite() || !biases_[l].allFinite()) return false;
  }
  return true;
}

bool DenseNetwork::operator==(const DenseNetwork& other) const {
  if (layers_ != other.layers_) return false;
  for (std::size_t l = 0; l < depth(); ++l) {
    if (weights_[l] != other.weights_[l] || biases_[l] != other.biases_[l]) return false;
  }
  return true;
}

BatchGradient backprop(const DenseNetwork& net, const Eigen::MatrixXd& inputs,
                       const Eigen::MatrixXd& targets, LossKind loss) {
  check_targets(net, inputs, targets, loss);
  const std::vector<Eigen::MatrixXd> acts = forward_all(net, inputs);
  const Eigen::MatrixXd& out = acts.back();
  const auto batch = static_cast<double>(inputs.cols());

  BatchGradient result;
  result.loss = loss_from_output(out, targets, loss);
  result.grads.weights.resize(net.depth());
  result.grads.biases.resize(net.depth());

  Eigen::MatrixXd delta;
  if (loss == LossKind::cross_entropy) {
    delta = (out - targets) / batch;
  } else {
    delta = (out - targets) * (2.0 / (static_cast<double>(out.rows()) * batch));
    scale_by_derivative(net.layers().back().activation, out, delta);
  }
  for (std::size_t l = net.depth(); l-- > 0;) {
    result.grads.weights[l].noalias() = delta * acts[l].transpose();
    result.grads.biases[l] = delta.rowwise().sum();
    if (l == 0) break;
    Eigen::MatrixXd prev = net.weights(l).transpose() * delta;
    scale_by_derivative(net.layers()[l - 1].activation, acts[l], prev);
    delta = std::move(prev);
  }
  return result;
}

double batch_loss(const DenseNetwork& net, const Eigen::MatrixXd& inputs,
                  const Eigen::MatrixXd& targets, LossKind loss) {
  check_targets(net, inputs, targets, loss);
  return loss_from_output(net.predict_batch(inputs), targets, loss);
}

double grad_check_batch(const DenseNetwork& net, const Eigen::MatrixXd& inputs,
                        const Eigen::MatrixXd& targets, LossKind loss, double epsilon) {
  if (!(epsilon > 0.0)) throw UsageError("grad_check: epsilon must be > 0");
  const BatchGradient analytic = backprop(net, inputs, targets, loss);
  DenseNetwork probe = net;
  double worst = 0.0;
  auto compare = [&](double& param, double a) {
    const double saved = param;
    param = saved + epsilon;
    const double up = batch_loss(probe, inputs, targets, loss);
    param = saved - epsilon;
    const double down = batch_loss(probe, inputs, targets, loss);
    param = saved;
    const double numeric = (up - down) / (2.0 * epsilon);
    const double denom = std::max({std::abs(a), std::abs(numeric), 1e-3});
    worst = std::max(worst, std::abs(a - numeric) / denom);
  };
  for (std::size_t l = 0; l < probe.depth(); ++l) {
    Eigen::MatrixXd& w = probe.weights(l);
    for (Eigen::Index r = 0; r < w.rows(); ++r) {
      for (Eigen::Index c = 0; c < w.cols(); ++c) compare(w(r, c), analytic.grads.weights[l](r, c));
    }
    Eigen::VectorXd& b = probe.biases(l);
    for (Eigen::Index r = 0; r < b.size(); ++r) compare(b(r), analytic.grads.biases[l](r));
  }
  return worst;
}

double grad_check(const DenseNetwork& net, const Eigen::VectorXd& input,
                  const Eigen::VectorXd& target, LossKind loss, double epsilon) {
  return grad_check_batch(net, Eigen::MatrixXd(input), Eigen::MatrixXd(target), loss, epsilon);
}

}  // namespace qreadout::nn
