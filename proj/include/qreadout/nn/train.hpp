#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "qreadout/nn/adam.hpp"
#include "qreadout/nn/network.hpp"

namespace qreadout::nn {

/// Inputs and targets as columns.
struct Dataset {
  Eigen::MatrixXd inputs;
  Eigen::MatrixXd targets;

  std::size_t size() const { return static_cast<std::size_t>(inputs.cols()); }
};

/// One-hot columns for class indices in [0, n_classes).
Eigen::MatrixXd one_hot(const std::vector<int>& class_indices, std::size_t n_classes);

/// Index of the largest entry; ties go to the lowest index.
int argmax(const Eigen::Ref<const Eigen::VectorXd>& v);

/// Fraction of columns whose output argmax equals the target argmax.
double accuracy(const DenseNetwork& net, const Dataset& data);

enum class Monitor { loss, accuracy };

/// Patience rule: stop once the monitored value has failed to improve for
/// `patience` consecutive epochs. An improvement must beat the best value so
/// far by at least min_delta; ties are not improvements. Epochs are 1-based.
class EarlyStopping {
 public:
  enum class Direction { minimize, maximize };

  EarlyStopping(std::size_t patience, Direction direction, double min_delta = 1e-12);

  /// Records the value of the next epoch; returns true when training should stop.
  bool update(double value);

  std::size_t epoch() const { return epoch_; }
  std::size_t best_epoch() const { return best_epoch_; }
  double best_value() const { return best_; }
  bool last_improved() const { return last_improved_; }

 private:
  std::size_t patience_;
  Direction direction_;
  double min_delta_;
  std::size_t epoch_ = 0;
  std::size_t best_epoch_ = 0;
  std::size_t stale_ = 0;
  bool last_improved_ = false;
  double best_;
};

struct TrainOptions {
  std::size_t batch_size = 32;
  std::size_t patience = 2;
  std::size_t max_epochs = 500;
  AdamConfig adam;
  std::uint64_t seed = 0;
  double min_improvement = 1e-12;
};

struct TrainLog {
  std::vector<double> epoch_loss;
  std::vector<double> monitor;
  std::size_t stop_epoch = 0;
  std::size_t best_epoch = 0;
  double wall_time_s = 0.0;

  /// Training loss of the best epoch.
  double best_loss() const { return best_epoch ? epoch_loss.at(best_epoch - 1) : 0.0; }
};

/// Shuffled mini-batch Adam training with early stopping on `monitor`
/// evaluated over monitor_set after each epoch (loss is minimised, accuracy
/// maximised). On return `net` holds the parameters of the best epoch.
/// Throws NumericError if a batch loss is not finite.
TrainLog train(DenseNetwork& net, const Dataset& train_set, const Dataset& monitor_set,
               LossKind loss, Monitor monitor, const TrainOptions& options);

}  // namespace qreadout::nn
