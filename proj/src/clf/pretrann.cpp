#include "qreadout/clf/pretrann.hpp"

#include "qreadout/clf/autoencoder.hpp"
#include "qreadout/errors.hpp"
#include "qreadout/rng.hpp"

namespace qreadout::clf {

namespace detail {

std::vector<int> labels_from(const Eigen::MatrixXd& probs, const std::vector<int>& classes) {
  std::vector<int> out(static_cast<std::size_t>(probs.cols()));
  for (Eigen::Index j = 0; j < probs.cols(); ++j) {
    out[static_cast<std::size_t>(j)] = classes.at(static_cast<std::size_t>(nn::argmax(probs.col(j))));
  }
  return out;
}

Eigen::MatrixXd scaled_copy(const dsp::Scaler& scaler, const Eigen::MatrixXd& raw) {
  Eigen::MatrixXd x = raw;
  scaler.apply_inplace(x);
  return x;
}

std::vector<int> checked_classes(const dsp::LabeledDataset& train) {
  if (train.size() < 2) throw UsageError("need at least two training samples");
  std::vector<int> classes = dsp::distinct_labels(train.labels);
  if (classes.size() < 2) throw UsageError("training data must contain at least two classes");
  return classes;
}

// Head training on already transformed inputs, shared by PreTraNN stage 2 and the FFNN.
nn::DenseNetwork train_head(const Eigen::MatrixXd& inputs, const std::vector<int>& idx,
                            std::size_t n_classes, const MonitorSplit& split,
                            const TrainingSettings& settings, std::uint64_t seed, nn::TrainLog& log) {
  const ClassifierHeadSpec spec{static_cast<std::size_t>(inputs.rows()), n_classes};
  Rng init(slot_seed(seed, SeedSlot::head_init));
  nn::DenseNetwork head = nn::DenseNetwork::glorot(spec.layers(), init);

  const Eigen::MatrixXd targets = nn::one_hot(idx, n_classes);
  const nn::Dataset fit{take_columns(inputs, split.fit), take_columns(targets, split.fit)};
  const nn::Dataset monitor{take_columns(inputs, split.monitor), take_columns(targets, split.monitor)};
  nn::TrainOptions options = settings.train;
  options.seed = slot_seed(seed, SeedSlot::head_shuffle);
  log = nn::train(head, fit, monitor, nn::LossKind::cross_entropy, nn::Monitor::accuracy, options);
  return head;
}

}  // namespace detail

using detail::checked_classes;
using detail::labels_from;
using detail::scaled_copy;

PreTraNNModel train_pretrann(const dsp::LabeledDataset& train, const PreTraNNOptions& options,
                             std::uint64_t seed) {
  PreTraNNModel model;
  model.seed = seed;
  model.classes = checked_classes(train);
  model.scaler = dsp::Scaler::fit(train.features);
  const Eigen::MatrixXd x = scaled_copy(model.scaler, train.features);

  const AutoencoderSpec spec{train.dim(), options.latent_fraction};
  Autoencoder ae = pretrain_autoencoder(x, spec, options.settings, seed);
  model.encoder = std::move(ae.encoder);
  model.decoder = std::move(ae.decoder);
  model.autoencoder_log = std::move(ae.log);

  const MonitorSplit split =
      split_monitor(train.size(), options.settings, slot_seed(seed, SeedSlot::monitor_split));
  const std::vector<int> idx = class_indices(train.labels, model.classes);
  const Eigen::MatrixXd latent = encode_batch(model.encoder, x);
  model.head = detail::train_head(latent, idx, model.classes.size(), split, options.settings, seed,
                                  model.head_log);

  if (options.fine_tune) {
    nn::DenseNetwork joint = nn::DenseNetwork::concat(model.encoder, model.head);
    const Eigen::MatrixXd targets = nn::one_hot(idx, model.classes.size());
    const nn::Dataset fit{take_columns(x, split.fit), take_columns(targets, split.fit)};
    const nn::Dataset monitor{take_columns(x, split.monitor), take_columns(targets, split.monitor)};
    nn::TrainOptions train_options = options.settings.train;
    train_options.seed = slot_seed(seed, SeedSlot::fine_tune_shuffle);
    model.fine_tune_log = nn::train(joint, fit, monitor, nn::LossKind::cross_entropy,
                                    nn::Monitor::accuracy, train_options);
    model.encoder = joint.slice(0, model.encoder.depth());
    model.head = joint.slice(model.encoder.depth(), joint.depth());
  }
  return model;
}

Eigen::MatrixXd PreTraNNModel::probabilities(const Eigen::MatrixXd& raw) const {
  return head.predict_batch(encoder.predict_batch(scaled_copy(scaler, raw)));
}

Prediction PreTraNNModel::predict(const Eigen::VectorXd& raw) const {
  Prediction p;
  p.probabilities = head.predict(encoder.predict(scaler.apply(raw)));
  p.label = classes.at(static_cast<std::size_t>(nn::argmax(p.probabilities)));
  return p;
}

std::vector<int> PreTraNNModel::predict_batch(const Eigen::MatrixXd& raw) const {
  return labels_from(probabilities(raw), classes);
}

FfnnModel train_ffnn(const dsp::LabeledDataset& train, const TrainingSettings& settings,
                     std::uint64_t seed) {
  FfnnModel model;
  model.seed = seed;
  model.classes = checked_classes(train);
  model.scaler = dsp::Scaler::fit(train.features);
  const Eigen::MatrixXd x = scaled_copy(model.scaler, train.features);
  const MonitorSplit split = split_monitor(train.size(), settings, slot_seed(seed, SeedSlot::monitor_split));
  model.net = detail::train_head(x, class_indices(train.labels, model.classes), model.classes.size(),
                                 split, settings, seed, model.log);
  return model;
}

Eigen::MatrixXd FfnnModel::probabilities(const Eigen::MatrixXd& raw) const {
  return net.predict_batch(scaled_copy(scaler, raw));
}

Prediction FfnnModel::predict(const Eigen::VectorXd& raw) const {
  Prediction p;
  p.probabilities = net.predict(scaler.apply(raw));
  p.label = classes.at(static_cast<std::size_t>(nn::argmax(p.probabilities)));
  return p;
}

std::vector<int> FfnnModel::predict_batch(const Eigen::MatrixXd& raw) const {
  return labels_from(probabilities(raw), classes);
}

}  // namespace qreadout::clf
