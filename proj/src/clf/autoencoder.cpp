#include "qreadout/clf/autoencoder.hpp"

#include "qreadout/errors.hpp"

namespace qreadout::clf {

Autoencoder pretrain_autoencoder(const Eigen::MatrixXd& scaled, const AutoencoderSpec& spec,
                                 const TrainingSettings& settings, std::uint64_t seed) {
  spec.validate();
  if (static_cast<std::size_t>(scaled.rows()) != spec.input_dim) {
    throw UsageError("autoencoder input has " + std::to_string(scaled.rows()) +
                     " rows, spec expects " + std::to_string(spec.input_dim));
  }
  if (scaled.size() == 0 || scaled.minCoeff() < 0.0 || scaled.maxCoeff() > 1.0) {
    throw UsageError("autoencoder inputs must be nonempty and scaled to [0, 1]");
  }

  std::vector<nn::LayerSpec> layers = spec.encoder_layers();
  for (const auto& l : spec.decoder_layers()) layers.push_back(l);
  Rng init(slot_seed(seed, SeedSlot::autoencoder_init));
  nn::DenseNetwork net = nn::DenseNetwork::glorot(std::move(layers), init);

  const MonitorSplit split = split_monitor(static_cast<std::size_t>(scaled.cols()), settings,
                                           slot_seed(seed, SeedSlot::monitor_split));
  nn::Dataset fit{take_columns(scaled, split.fit), {}};
  fit.targets = fit.inputs;
  nn::Dataset monitor{take_columns(scaled, split.monitor), {}};
  monitor.targets = monitor.inputs;

  nn::TrainOptions options = settings.train;
  options.seed = slot_seed(seed, SeedSlot::autoencoder_shuffle);

  Autoencoder out;
  out.spec = spec;
  out.log = nn::train(net, fit, monitor, nn::LossKind::mse, nn::Monitor::loss, options);
  out.encoder = net.slice(0, 3);
  out.decoder = net.slice(3, 6);
  return out;
}

Eigen::VectorXd encode(const nn::DenseNetwork& encoder, const Eigen::VectorXd& x) {
  return encoder.predict(x);
}

Eigen::MatrixXd encode_batch(const nn::DenseNetwork& encoder, const Eigen::MatrixXd& columns) {
  return encoder.predict_batch(columns);
}

Eigen::VectorXd decode(const nn::DenseNetwork& decoder, const Eigen::VectorXd& h) {
  return decoder.predict(h);
}

ProbeResult latent_probe(const nn::DenseNetwork& encoder, const nn::DenseNetwork& decoder,
                         const Eigen::VectorXd& x, std::size_t k, std::span<const double> values) {
  ProbeResult out;
  out.latent = encode(encoder, x);
  if (k >= static_cast<std::size_t>(out.latent.size())) {
    throw UsageError("latent component " + std::to_string(k) + " out of range (latent size " +
                     std::to_string(out.latent.size()) + ")");
  }
  for (double v : values) {
    if (!(v >= -1.0 && v <= 1.0)) throw UsageError("probe values must lie in [-1, 1]");
  }
  out.reference = decode(decoder, out.latent);
  out.family.reserve(values.size());
  for (double v : values) {
    Eigen::VectorXd h = out.latent;
    h[static_cast<Eigen::Index>(k)] = v;
    out.family.push_back(decode(decoder, h));
  }
  return out;
}

}  // namespace qreadout::clf
