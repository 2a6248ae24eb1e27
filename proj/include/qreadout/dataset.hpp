#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "qreadout/demod.hpp"

namespace qreadout::dsp {

/// Feature vectors stored column-wise (one column per sample) with labels.
struct LabeledDataset {
  Eigen::MatrixXd features;  // d x n
  std::vector<int> labels;   // n
  double dt_ns = 0.0;
  double duration_ns = 0.0;

  std::size_t size() const { return labels.size(); }
  std::size_t dim() const { return static_cast<std::size_t>(features.rows()); }

  static LabeledDataset from_features(std::span<const FeatureVector> fvs);
  FeatureVector feature(std::size_t index) const;
  LabeledDataset subset(std::span<const std::size_t> indices) const;
};

struct Split {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Seeded shuffle of [0, n) cut at round(train_fraction * n).
/// Train and test are disjoint and together cover every index.
Split shuffle_split(std::size_t n, double train_fraction, std::uint64_t seed);

/// Sorted distinct labels.
std::vector<int> distinct_labels(std::span<const int> labels);

}  // namespace qreadout::dsp
