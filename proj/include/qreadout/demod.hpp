#pragma once

// Raw shot -> feature vector pipeline: full and sliced heterodyne
// demodulation, Hann smoothing, I/Q flattening and [0, 1] feature scaling.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "qreadout/readout_sim.hpp"

namespace qreadout::dsp {

struct IQPoint {
  double i = 0.0;
  double q = 0.0;

  bool operator==(const IQPoint&) const = default;
};

struct Trajectory {
  std::vector<double> i_series;
  std::vector<double> q_series;
  double dt_ns = 0.0;
  std::optional<int> label;
  /// Hann window actually applied (1 = unsmoothed).
  std::size_t smoothing_window = 1;
  /// Set when the requested window was >= the series length and got clamped.
  bool smoothing_clamped = false;

  std::size_t size() const { return i_series.size(); }
};

/// [I part | Q part], length 2C.
struct FeatureVector {
  std::vector<double> values;
  std::optional<int> label;
};

/// Whole-shot demodulation: I = (2/T) sum r cos(w t) dt, Q = -(2/T) sum r sin(w t) dt
/// on the raw sample midpoints. Throws UsageError if the shot does not span a
/// whole number of carrier periods.
IQPoint full_demod(const sim::RawShot& shot, double f_if_hz);

/// The same integrals evaluated per window of dt_ns, giving C = T/dt points
/// per quadrature. dt_ns must divide the shot and span whole carrier periods.
Trajectory sliced_demod(const sim::RawShot& shot, double f_if_hz, double dt_ns);

/// Symmetric Hann window with `len` strictly positive taps, normalised to unit sum:
/// w[n] = 0.5 - 0.5 cos(2 pi (n + 1) / (len + 1)).
std::vector<double> hann_kernel(std::size_t len);

/// Convolves both quadratures with hann_kernel(window_len) using reflect
/// padding, keeping the length. A window >= the series length is clamped to
/// the series length, flagged on the result, and warned about once per process.
Trajectory smooth(const Trajectory& traj, std::size_t window_len);

/// Same-length Hann smoothing of a single series; exposed for reuse.
std::vector<double> smooth_series(std::span<const double> series, std::size_t window_len);

FeatureVector flatten(const Trajectory& traj);
Trajectory unflatten(const FeatureVector& fv, double dt_ns);

/// Time average of a trajectory; equals full_demod for unsmoothed slices.
IQPoint time_average(const Trajectory& traj);

/// Per-dimension min-max map to [0, 1], fit on training data only.
class Scaler {
 public:
  Scaler() = default;
  Scaler(std::vector<double> min, std::vector<double> max);

  static Scaler fit(std::span<const FeatureVector> train);
  /// Columns of `train` are samples.
  static Scaler fit(const Eigen::MatrixXd& train);

  FeatureVector apply(const FeatureVector& fv) const;
  void apply_inplace(Eigen::MatrixXd& columns) const;
  Eigen::VectorXd apply(const Eigen::VectorXd& x) const;

  std::size_t dim() const { return min_.size(); }
  const std::vector<double>& min() const { return min_; }
  const std::vector<double>& max() const { return max_; }

 private:
  double map(std::size_t d, double v) const;

  std::vector<double> min_;
  std::vector<double> max_;
};

}  // namespace qreadout::dsp
