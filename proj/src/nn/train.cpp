#include "qreadout/nn/train.hpp"

#include <chrono>
#include <cmath>
#include <numeric>
#include <sstream>

#include "qreadout/errors.hpp"

namespace qreadout::nn {

Eigen::MatrixXd one_hot(const std::vector<int>& class_indices, std::size_t n_classes) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n_classes),
                                              static_cast<Eigen::Index>(class_indices.size()));
  for (std::size_t i = 0; i < class_indices.size(); ++i) {
    const int c = class_indices[i];
    if (c < 0 || static_cast<std::size_t>(c) >= n_classes) throw UsageError("one_hot: class out of range");
    out(c, static_cast<Eigen::Index>(i)) = 1.0;
  }
  return out;
}

int argmax(const Eigen::Ref<const Eigen::VectorXd>& v) {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i) {
    if (v(i) > v(best)) best = i;
  }
  return static_cast<int>(best);
}

double accuracy(const DenseNetwork& net, const Dataset& data) {
  if (data.size() == 0) return 0.0;
  const Eigen::MatrixXd out = net.predict_batch(data.inputs);
  std::size_t hits = 0;
  for (Eigen::Index c = 0; c < out.cols(); ++c) {
    if (argmax(out.col(c)) == argmax(data.targets.col(c))) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(data.size());
}

EarlyStopping::EarlyStopping(std::size_t patience, Direction direction, double min_delta)
    : patience_(patience),
      direction_(direction),
      min_delta_(min_delta),
      best_(direction == Direction::minimize ? std::numeric_limits<double>::infinity()
                                             : -std::numeric_limits<double>::infinity()) {
  if (patience == 0) throw UsageError("EarlyStopping: patience must be >= 1");
}

bool EarlyStopping::update(double value) {
  ++epoch_;
  const bool improved = direction_ == Direction::minimize ? value < best_ - min_delta_
                                                          : value > best_ + min_delta_;
  last_improved_ = improved;
  if (improved) {
    best_ = value;
    best_epoch_ = epoch_;
    stale_ = 0;
    return false;
  }
  ++stale_;
  return stale_ >= patience_;
}

TrainLog train(DenseNetwork& net, const Dataset& train_set, const Dataset& monitor_set,
               LossKind loss, Monitor monitor, const TrainOptions& options) {
  if (train_set.size() == 0 || monitor_set.size() == 0) {
    throw UsageError("train: training and monitor sets must be nonempty");
  }
  if (options.batch_size == 0) throw UsageError("train: batch_size must be >= 1");
  if (options.max_epochs == 0) throw UsageError("train: max_epochs must be >= 1");

  const auto start = std::chrono::steady_clock::now();
  EarlyStopping stopper(options.patience,
                        monitor == Monitor::loss ? EarlyStopping::Direction::minimize
                                                 : EarlyStopping::Direction::maximize,
                        options.min_improvement);
  AdamState adam(net, options.adam);
  Rng rng(options.seed);
  TrainLog log;
  DenseNetwork best = net;

  const std::size_t n = train_set.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Eigen::MatrixXd batch_in(train_set.inputs.rows(), 0);
  Eigen::MatrixXd batch_target(train_set.targets.rows(), 0);

  for (std::size_t epoch = 1; epoch <= options.max_epochs; ++epoch) {
    shuffle(std::span<std::size_t>(order), rng);
    double loss_sum = 0.0;
    for (std::size_t first = 0; first < n; first += options.batch_size) {
      const std::size_t count = std::min(options.batch_size, n - first);
      batch_in.resize(train_set.inputs.rows(), static_cast<Eigen::Index>(count));
      batch_target.resize(train_set.targets.rows(), static_cast<Eigen::Index>(count));
      for (std::size_t j = 0; j < count; ++j) {
        const auto src = static_cast<Eigen::Index>(order[first + j]);
        batch_in.col(static_cast<Eigen::Index>(j)) = train_set.inputs.col(src);
        batch_target.col(static_cast<Eigen::Index>(j)) = train_set.targets.col(src);
      }
      const BatchGradient step = backprop(net, batch_in, batch_target, loss);
      if (!std::isfinite(step.loss)) {
        std::ostringstream msg;
        msg << "non-finite training loss at epoch " << epoch << ", batch starting at sample "
            << first;
        throw NumericError(msg.str());
      }
      loss_sum += step.loss * static_cast<double>(count);
      adam.step(net, step.grads);
    }
    log.epoch_loss.push_back(loss_sum / static_cast<double>(n));

    const double value = monitor == Monitor::loss
                             ? batch_loss(net, monitor_set.inputs, monitor_set.targets, loss)
                             : accuracy(net, monitor_set);
    if (!std::isfinite(value)) {
      throw NumericError("non-finite monitor value at epoch " + std::to_string(epoch));
    }
    log.monitor.push_back(value);
    const bool stop = stopper.update(value);
    if (stopper.last_improved()) best = net;
    log.stop_epoch = epoch;
    if (stop) break;
  }
  log.best_epoch = stopper.best_epoch();
  net = std::move(best);
  log.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return log;
}

}  // namespace qreadout::nn
