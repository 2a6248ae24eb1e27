#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "qreadout/clf/architecture.hpp"
#include "qreadout/clf/common.hpp"
#include "qreadout/dataset.hpp"
#include "qreadout/demod.hpp"
#include "qreadout/nn/network.hpp"
#include "qreadout/nn/train.hpp"

namespace qreadout::clf {

struct Prediction {
  int label = 0;
  Eigen::VectorXd probabilities;  // indexed like the model's class list
};

struct PreTraNNOptions {
  TrainingSettings settings;
  Fraction latent_fraction{1, 4};
  /// After the frozen-encoder head is trained, continue training encoder and
  /// head jointly. Off by default.
  bool fine_tune = false;
};

struct PreTraNNModel {
  dsp::Scaler scaler;
  nn::DenseNetwork encoder;
  nn::DenseNetwork decoder;  // kept for reconstruction and latent probing
  nn::DenseNetwork head;
  std::vector<int> classes;  // sorted; head output c predicts classes[c]
  nn::TrainLog autoencoder_log;
  nn::TrainLog head_log;
  nn::TrainLog fine_tune_log;
  std::uint64_t seed = 0;

  /// `raw` is an unscaled feature vector; the model applies its scaler.
  Prediction predict(const Eigen::VectorXd& raw) const;
  /// Class probabilities, one column per sample.
  Eigen::MatrixXd probabilities(const Eigen::MatrixXd& raw) const;
  std::vector<int> predict_batch(const Eigen::MatrixXd& raw) const;
};

/// Stage 1 pre-trains the autoencoder on the scaled features (labels unused);
/// stage 2 trains the head on cached latent vectors with cross-entropy,
/// stopping on monitor accuracy. The encoder is not touched in stage 2.
PreTraNNModel train_pretrann(const dsp::LabeledDataset& train, const PreTraNNOptions& options,
                             std::uint64_t seed);

struct FfnnModel {
  dsp::Scaler scaler;
  nn::DenseNetwork net;
  std::vector<int> classes;
  nn::TrainLog log;
  std::uint64_t seed = 0;

  Prediction predict(const Eigen::VectorXd& raw) const;
  Eigen::MatrixXd probabilities(const Eigen::MatrixXd& raw) const;
  std::vector<int> predict_batch(const Eigen::MatrixXd& raw) const;
};

/// The PreTraNN head shape applied directly to the scaled features.
FfnnModel train_ffnn(const dsp::LabeledDataset& train, const TrainingSettings& settings,
                     std::uint64_t seed);

}  // namespace qreadout::clf
