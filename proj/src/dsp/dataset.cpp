#include "qreadout/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "qreadout/errors.hpp"
#include "qreadout/rng.hpp"

namespace qreadout::dsp {

LabeledDataset LabeledDataset::from_features(std::span<const FeatureVector> fvs) {
  LabeledDataset ds;
  if (fvs.empty()) return ds;
  const std::size_t dim = fvs.front().values.size();
  ds.features.resize(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(fvs.size()));
  ds.labels.reserve(fvs.size());
  for (std::size_t c = 0; c < fvs.size(); ++c) {
    if (fvs[c].values.size() != dim) throw UsageError("LabeledDataset: inconsistent dimensions");
    if (!fvs[c].label) throw UsageError("LabeledDataset: unlabeled feature vector");
    ds.features.col(static_cast<Eigen::Index>(c)) =
        Eigen::Map<const Eigen::VectorXd>(fvs[c].values.data(), static_cast<Eigen::Index>(dim));
    ds.labels.push_back(*fvs[c].label);
  }
  return ds;
}

FeatureVector LabeledDataset::feature(std::size_t index) const {
  FeatureVector fv;
  const auto col = features.col(static_cast<Eigen::Index>(index));
  fv.values.assign(col.data(), col.data() + col.size());
  fv.label = labels.at(index);
  return fv;
}

LabeledDataset LabeledDataset::subset(std::span<const std::size_t> indices) const {
  LabeledDataset out;
  out.dt_ns = dt_ns;
  out.duration_ns = duration_ns;
  out.features.resize(features.rows(), static_cast<Eigen::Index>(indices.size()));
  out.labels.reserve(indices.size());
  for (std::size_t c = 0; c < indices.size(); ++c) {
    out.features.col(static_cast<Eigen::Index>(c)) = features.col(static_cast<Eigen::Index>(indices[c]));
    out.labels.push_back(labels.at(indices[c]));
  }
  return out;
}

Split shuffle_split(std::size_t n, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw UsageError("split fraction must lie strictly between 0 and 1");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  shuffle(std::span<std::size_t>(order), rng);
  const auto cut = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));
  Split split;
  split.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(cut));
  split.test.assign(order.begin() + static_cast<std::ptrdiff_t>(cut), order.end());
  return split;
}

std::vector<int> distinct_labels(std::span<const int> labels) {
  std::vector<int> out(labels.begin(), labels.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace qreadout::dsp
