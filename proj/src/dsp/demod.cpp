#include "qreadout/demod.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iostream>
#include <numbers>

#include "qreadout/errors.hpp"

namespace qreadout::dsp {

namespace {

constexpr double kIntegerTolerance = 1e-6;

bool near_integer(double x) { return std::abs(x - std::round(x)) < kIntegerTolerance; }

void require_whole_periods(double window_ns, double f_if_hz, const char* what) {
  const double periods = window_ns * 1e-9 * f_if_hz;
  if (!(periods >= 1.0 - kIntegerTolerance) || !near_integer(periods)) {
    throw UsageError(std::string(what) + " of " + std::to_string(window_ns) +
                     " ns is not a whole number of carrier periods");
  }
}

// Accumulates sum r cos(w t) and -sum r sin(w t) over samples [first, last).
IQPoint demod_sum(std::span<const double> samples, std::size_t first, std::size_t last,
                  double omega, double sample_rate_hz) {
  double si = 0.0;
  double sq = 0.0;
  for (std::size_t k = first; k < last; ++k) {
    const double t_s = (static_cast<double>(k) + 0.5) / sample_rate_hz;
    si += samples[k] * std::cos(omega * t_s);
    sq -= samples[k] * std::sin(omega * t_s);
  }
  return {si, sq};
}

}  // namespace

IQPoint full_demod(const sim::RawShot& shot, double f_if_hz) {
  require_whole_periods(shot.duration_ns, f_if_hz, "shot duration");
  const std::size_t n = shot.samples.size();
  if (n == 0) throw UsageError("full_demod: empty shot");
  const double omega = 2.0 * std::numbers::pi * f_if_hz;
  const IQPoint sum = demod_sum(shot.samples, 0, n, omega, shot.sample_rate_hz);
  // (2/T) * sum * dtau with T = n * dtau
  const double scale = 2.0 / static_cast<double>(n);
  return {sum.i * scale, sum.q * scale};
}

Trajectory sliced_demod(const sim::RawShot& shot, double f_if_hz, double dt_ns) {
  require_whole_periods(dt_ns, f_if_hz, "slice length");
  const double slices = shot.duration_ns / dt_ns;
  if (!(slices >= 1.0 - kIntegerTolerance) || !near_integer(slices)) {
    throw UsageError("slice length does not divide the shot duration");
  }
  const auto c = static_cast<std::size_t>(std::llround(slices));
  const std::size_t n = shot.samples.size();
  if (n % c != 0) throw UsageError("slice does not contain a whole number of raw samples");
  const std::size_t per_slice = n / c;

  Trajectory traj;
  traj.dt_ns = dt_ns;
  traj.label = shot.prepared_label;
  traj.i_series.resize(c);
  traj.q_series.resize(c);
  const double omega = 2.0 * std::numbers::pi * f_if_hz;
  const double scale = 2.0 / static_cast<double>(per_slice);
  for (std::size_t j = 0; j < c; ++j) {
    const IQPoint sum = demod_sum(shot.samples, j * per_slice, (j + 1) * per_slice, omega,
                                  shot.sample_rate_hz);
    traj.i_series[j] = sum.i * scale;
    traj.q_series[j] = sum.q * scale;
  }
  return traj;
}

std::vector<double> hann_kernel(std::size_t len) {
  if (len == 0) throw UsageError("hann_kernel: length must be >= 1");
  std::vector<double> w(len);
  double total = 0.0;
  for (std::size_t n = 0; n < len; ++n) {
    w[n] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(n + 1) /
                                static_cast<double>(len + 1));
    total += w[n];
  }
  for (double& x : w) x /= total;
  return w;
}

std::vector<double> smooth_series(std::span<const double> series, std::size_t window_len) {
  const std::size_t n = series.size();
  if (window_len <= 1 || n <= 1) return {series.begin(), series.end()};
  window_len = std::min(window_len, n);
  const std::vector<double> kernel = hann_kernel(window_len);
  const std::size_t left = (window_len - 1) / 2;

  // Reflect about the end samples (the end sample itself is not repeated).
  auto at = [&](std::ptrdiff_t idx) {
    const auto last = static_cast<std::ptrdiff_t>(n) - 1;
    if (idx < 0) idx = -idx;
    if (idx > last) idx = 2 * last - idx;
    return series[static_cast<std::size_t>(idx)];
  };

  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < window_len; ++j) {
      acc += kernel[j] * at(static_cast<std::ptrdiff_t>(i + j) - static_cast<std::ptrdiff_t>(left));
    }
    out[i] = acc;
  }
  return out;
}

Trajectory smooth(const Trajectory& traj, std::size_t window_len) {
  if (window_len == 0) throw UsageError("smooth: window_len must be >= 1");
  Trajectory out = traj;
  std::size_t effective = window_len;
  if (window_len > 1 && window_len >= traj.size()) {
    effective = std::max<std::size_t>(1, traj.size());
    out.smoothing_clamped = true;
    static std::atomic<bool> warned{false};
    if (!warned.exchange(true)) {
      std::cerr << "warning: Hann window of " << window_len << " clamped to series length "
                << traj.size() << "\n";
    }
  }
  out.i_series = smooth_series(traj.i_series, effective);
  out.q_series = smooth_series(traj.q_series, effective);
  out.smoothing_window = effective;
  return out;
}

FeatureVector flatten(const Trajectory& traj) {
  if (traj.i_series.size() != traj.q_series.size()) {
    throw UsageError("flatten: I and Q series differ in length");
  }
  FeatureVector fv;
  fv.values.reserve(2 * traj.size());
  fv.values.insert(fv.values.end(), traj.i_series.begin(), traj.i_series.end());
  fv.values.insert(fv.values.end(), traj.q_series.begin(), traj.q_series.end());
  fv.label = traj.label;
  return fv;
}

Trajectory unflatten(const FeatureVector& fv, double dt_ns) {
  if (fv.values.size() % 2 != 0) throw UsageError("unflatten: odd feature length");
  const std::size_t c = fv.values.size() / 2;
  Trajectory traj;
  traj.dt_ns = dt_ns;
  traj.label = fv.label;
  traj.i_series.assign(fv.values.begin(), fv.values.begin() + static_cast<std::ptrdiff_t>(c));
  traj.q_series.assign(fv.values.begin() + static_cast<std::ptrdiff_t>(c), fv.values.end());
  return traj;
}

IQPoint time_average(const Trajectory& traj) {
  if (traj.size() == 0) throw UsageError("time_average: empty trajectory");
  double si = 0.0;
  double sq = 0.0;
  for (std::size_t j = 0; j < traj.size(); ++j) {
    si += traj.i_series[j];
    sq += traj.q_series[j];
  }
  const auto c = static_cast<double>(traj.size());
  return {si / c, sq / c};
}

Scaler::Scaler(std::vector<double> min, std::vector<double> max)
    : min_(std::move(min)), max_(std::move(max)) {
  if (min_.size() != max_.size()) throw UsageError("Scaler: min/max length mismatch");
  for (std::size_t d = 0; d < min_.size(); ++d) {
    if (max_[d] < min_[d]) throw UsageError("Scaler: max < min");
  }
}

Scaler Scaler::fit(std::span<const FeatureVector> train) {
  if (train.empty()) throw UsageError("Scaler::fit: empty training set");
  const std::size_t dim = train.front().values.size();
  std::vector<double> lo(train.front().values);
  std::vector<double> hi(train.front().values);
  for (const FeatureVector& fv : train) {
    if (fv.values.size() != dim) throw UsageError("Scaler::fit: inconsistent dimensions");
    for (std::size_t d = 0; d < dim; ++d) {
      lo[d] = std::min(lo[d], fv.values[d]);
      hi[d] = std::max(hi[d], fv.values[d]);
    }
  }
  return Scaler(std::move(lo), std::move(hi));
}

Scaler Scaler::fit(const Eigen::MatrixXd& train) {
  if (train.cols() == 0) throw UsageError("Scaler::fit: empty training set");
  const Eigen::VectorXd lo = train.rowwise().minCoeff();
  const Eigen::VectorXd hi = train.rowwise().maxCoeff();
  return Scaler(std::vector<double>(lo.data(), lo.data() + lo.size()),
                std::vector<double>(hi.data(), hi.data() + hi.size()));
}

double Scaler::map(std::size_t d, double v) const {
  const double range = max_[d] - min_[d];
  if (range <= 0.0) return 0.5;
  return std::clamp((v - min_[d]) / range, 0.0, 1.0);
}

FeatureVector Scaler::apply(const FeatureVector& fv) const {
  if (fv.values.size() != dim()) throw UsageError("Scaler::apply: dimension mismatch");
  FeatureVector out;
  out.label = fv.label;
  out.values.resize(dim());
  for (std::size_t d = 0; d < dim(); ++d) out.values[d] = map(d, fv.values[d]);
  return out;
}

Eigen::VectorXd Scaler::apply(const Eigen::VectorXd& x) const {
  if (static_cast<std::size_t>(x.size()) != dim()) {
    throw UsageError("Scaler::apply: dimension mismatch");
  }
  Eigen::VectorXd out(x.size());
  for (std::size_t d = 0; d < dim(); ++d) out(static_cast<Eigen::Index>(d)) = map(d, x(static_cast<Eigen::Index>(d)));
  return out;
}

void Scaler::apply_inplace(Eigen::MatrixXd& columns) const {
  if (static_cast<std::size_t>(columns.rows()) != dim()) {
    throw UsageError("Scaler::apply: dimension mismatch");
  }
  for (Eigen::Index c = 0; c < columns.cols(); ++c) {
    for (std::size_t d = 0; d < dim(); ++d) {
      auto& v = columns(static_cast<Eigen::Index>(d), c);
      v = map(d, v);
    }
  }
}

}  // namespace qreadout::dsp
