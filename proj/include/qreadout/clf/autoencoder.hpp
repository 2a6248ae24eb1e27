#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "qreadout/clf/architecture.hpp"
#include "qreadout/clf/common.hpp"
#include "qreadout/nn/network.hpp"
#include "qreadout/nn/train.hpp"

namespace qreadout::clf {

struct Autoencoder {
  AutoencoderSpec spec;
  nn::DenseNetwork encoder;
  nn::DenseNetwork decoder;
  nn::TrainLog log;
};

/// Trains decoder(encoder(x)) to reproduce x under mse with early stopping on
/// the monitor loss. `scaled` holds one sample per column, values in [0, 1].
Autoencoder pretrain_autoencoder(const Eigen::MatrixXd& scaled, const AutoencoderSpec& spec,
                                 const TrainingSettings& settings, std::uint64_t seed);

Eigen::VectorXd encode(const nn::DenseNetwork& encoder, const Eigen::VectorXd& x);
Eigen::MatrixXd encode_batch(const nn::DenseNetwork& encoder, const Eigen::MatrixXd& columns);
Eigen::VectorXd decode(const nn::DenseNetwork& decoder, const Eigen::VectorXd& h);

struct ProbeResult {
  Eigen::VectorXd latent;     // encode(x)
  Eigen::VectorXd reference;  // decode(encode(x))
  std::vector<Eigen::VectorXd> family;  // one per probe value
};

/// Reconstructions with latent component k replaced by each value in turn.
/// Throws UsageError for k out of range or a value outside [-1, 1].
ProbeResult latent_probe(const nn::DenseNetwork& encoder, const nn::DenseNetwork& decoder,
                         const Eigen::VectorXd& x, std::size_t k, std::span<const double> values);

}  // namespace qreadout::clf
