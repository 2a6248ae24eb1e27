#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "qreadout/nn/train.hpp"

namespace qreadout::clf {

/// Knobs shared by every network-based classifier.
struct TrainingSettings {
  /// Batch size, patience, epoch cap and Adam; the seed field is ignored
  /// (each stage derives its own from the model seed).
  nn::TrainOptions train;
  /// Share of the training split held out for early stopping.
  double monitor_fraction = 0.15;
  /// Monitor on the fitting data itself instead of a holdout.
  bool monitor_on_train = false;
};

/// Sub-streams of one model seed.
enum class SeedSlot : std::uint64_t {
  autoencoder_init = 1,
  autoencoder_shuffle,
  head_init,
  head_shuffle,
  monitor_split,
  fine_tune_shuffle,
};
std::uint64_t slot_seed(std::uint64_t model_seed, SeedSlot slot);

struct MonitorSplit {
  std::vector<std::size_t> fit;
  std::vector<std::size_t> monitor;
};

/// Seeded holdout of round(monitor_fraction * n) samples (at least one, and
/// at least one left to fit). With monitor_on_train both lists cover [0, n).
MonitorSplit split_monitor(std::size_t n, const TrainingSettings& settings, std::uint64_t seed);

/// Selected columns of `m`.
Eigen::MatrixXd take_columns(const Eigen::MatrixXd& m, const std::vector<std::size_t>& cols);

/// Maps labels to class indices through the sorted distinct label list.
/// Throws DataError for a label not in `classes`.
std::vector<int> class_indices(const std::vector<int>& labels, const std::vector<int>& classes);

}  // namespace qreadout::clf
