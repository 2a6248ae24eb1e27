#include "qreadout/clf/common.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "qreadout/errors.hpp"
#include "qreadout/rng.hpp"

namespace qreadout::clf {

std::uint64_t slot_seed(std::uint64_t model_seed, SeedSlot slot) {
  return derive_seed({model_seed, static_cast<std::uint64_t>(slot)});
}

MonitorSplit split_monitor(std::size_t n, const TrainingSettings& settings, std::uint64_t seed) {
  if (n < 2) throw UsageError("need at least two training samples");
  MonitorSplit out;
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  if (settings.monitor_on_train) {
    out.fit = idx;
    out.monitor = idx;
    return out;
  }
  if (!(settings.monitor_fraction > 0.0 && settings.monitor_fraction < 1.0)) {
    throw UsageError("monitor fraction must lie in (0, 1)");
  }
  Rng rng(seed);
  shuffle(std::span<std::size_t>(idx), rng);
  auto held = static_cast<std::size_t>(std::llround(settings.monitor_fraction * static_cast<double>(n)));
  held = std::clamp<std::size_t>(held, 1, n - 1);
  out.monitor.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(held));
  out.fit.assign(idx.begin() + static_cast<std::ptrdiff_t>(held), idx.end());
  std::sort(out.monitor.begin(), out.monitor.end());
  std::sort(out.fit.begin(), out.fit.end());
  return out;
}

Eigen::MatrixXd take_columns(const Eigen::MatrixXd& m, const std::vector<std::size_t>& cols) {
  Eigen::MatrixXd out(m.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = m.col(static_cast<Eigen::Index>(cols[j]));
  return out;
}

std::vector<int> class_indices(const std::vector<int>& labels, const std::vector<int>& classes) {
  std::vector<int> out;
  out.reserve(labels.size());
  for (int l : labels) {
    const auto it = std::lower_bound(classes.begin(), classes.end(), l);
    if (it == classes.end() || *it != l) throw DataError("label " + std::to_string(l) + " is not a known class");
    out.push_back(static_cast<int>(it - classes.begin()));
  }
  return out;
}

}  // namespace qreadout::clf
