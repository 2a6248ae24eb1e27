#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <vector>

#include "qreadout/dataset.hpp"
#include "qreadout/demod.hpp"
#include "qreadout/errors.hpp"
#include "qreadout/rng.hpp"

using namespace qreadout;
using namespace qreadout::dsp;

namespace {

constexpr double kFif = 62.5e6;

sim::RawShot tone(double amp, double phase, double freq, double duration_ns) {
  sim::RawShot s;
  s.duration_ns = duration_ns;
  s.sample_rate_hz = 1e9;
  const auto n = static_cast<std::size_t>(duration_ns);
  s.samples.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double t = (static_cast<double>(k) + 0.5) * 1e-9;
    s.samples[k] = amp * std::cos(2 * std::numbers::pi * freq * t + phase);
  }
  return s;
}

// Midpoint quadrature at 10x the sample rate, written independently.
IQPoint oversampled(double amp, double phase, double duration_ns) {
  const int n = static_cast<int>(duration_ns * 10);
  double si = 0, sq = 0;
  const double w = 2 * std::numbers::pi * kFif;
  for (int k = 0; k < n; ++k) {
    const double t = (k + 0.5) * 1e-10;
    const double r = amp * std::cos(w * t + phase);
    si += r * std::cos(w * t);
    sq += r * std::sin(w * t);
  }
  return {2.0 * si / n, -2.0 * sq / n};
}

}  // namespace

TEST_SUITE("demod") {

TEST_CASE("zero signal demodulates to the origin") {
  const auto s = tone(0.0, 0.0, kFif, 160);
  const IQPoint p = full_demod(s, kFif);
  CHECK(p.i == 0.0);
  CHECK(p.q == 0.0);
}

TEST_CASE("pure tone gives (A cos phi, A sin phi)") {
  const double a = 2.0, phi = std::numbers::pi / 3;
  const IQPoint p = full_demod(tone(a, phi, kFif, 800), kFif);
  const IQPoint o = oversampled(a, phi, 800);
  CHECK(std::abs(p.i - 1.0) < 1e-6);
  CHECK(std::abs(p.q - std::sqrt(3.0)) < 1e-6);
  CHECK(std::abs(o.i - 1.0) < 1e-6);
  CHECK(std::abs(o.q - std::sqrt(3.0)) < 1e-6);
}

TEST_CASE("second harmonic is rejected") {
  const IQPoint p = full_demod(tone(1.0, 0.3, 2 * kFif, 800), kFif);
  CHECK(std::abs(p.i) < 1e-6);
  CHECK(std::abs(p.q) < 1e-6);
}

TEST_CASE("non-whole-period durations and slices are rejected") {
  auto s = tone(1.0, 0.0, kFif, 808);
  CHECK_THROWS_AS(full_demod(s, kFif), UsageError);
  s = tone(1.0, 0.0, kFif, 800);
  CHECK_THROWS_AS(sliced_demod(s, kFif, 24), UsageError);
  CHECK_THROWS_AS(sliced_demod(s, kFif, 48), UsageError);
}

TEST_CASE("slice counts") {
  CHECK(sliced_demod(tone(1, 0, kFif, 800), kFif, 16).size() == 50);
  CHECK(sliced_demod(tone(1, 0, kFif, 8000), kFif, 16).size() == 500);
  CHECK(flatten(sliced_demod(tone(1, 0, kFif, 2400), kFif, 16)).values.size() == 300);
  CHECK(flatten(sliced_demod(tone(1, 0, kFif, 8000), kFif, 16)).values.size() == 1000);
}

TEST_CASE("stationary tone: every slice equals the full demodulation") {
  const auto s = tone(1.7, -0.4, kFif, 480);
  const IQPoint full = full_demod(s, kFif);
  const Trajectory t = sliced_demod(s, kFif, 16);
  for (std::size_t j = 0; j < t.size(); ++j) {
    CHECK(std::abs(t.i_series[j] - full.i) < 1e-12);
    CHECK(std::abs(t.q_series[j] - full.q) < 1e-12);
  }
}

TEST_CASE("time average of slices equals full demodulation on noisy data") {
  Rng rng(8);
  sim::RawShot s = tone(1.0, 0.2, kFif, 1600);
  for (double& v : s.samples) v += 3.0 * rng.normal();
  const IQPoint full = full_demod(s, kFif);
  const IQPoint avg = time_average(sliced_demod(s, kFif, 16));
  CHECK(std::abs(full.i - avg.i) < 1e-9);
  CHECK(std::abs(full.q - avg.q) < 1e-9);
}

TEST_CASE("demodulation is linear") {
  Rng rng(9);
  sim::RawShot a = tone(0, 0, kFif, 320), b = a, mix = a;
  for (std::size_t k = 0; k < a.samples.size(); ++k) {
    a.samples[k] = rng.normal();
    b.samples[k] = rng.normal();
    mix.samples[k] = 2.5 * a.samples[k] - 0.5 * b.samples[k];
  }
  const IQPoint pa = full_demod(a, kFif), pb = full_demod(b, kFif), pm = full_demod(mix, kFif);
  CHECK(pm.i == doctest::Approx(2.5 * pa.i - 0.5 * pb.i).epsilon(1e-12));
  CHECK(pm.q == doctest::Approx(2.5 * pa.q - 0.5 * pb.q).epsilon(1e-12));
}

TEST_CASE("Hann kernel is positive, symmetric and unit-sum") {
  for (std::size_t len : {1u, 2u, 5u, 50u}) {
    const auto w = hann_kernel(len);
    CHECK(std::accumulate(w.begin(), w.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-14));
    for (std::size_t i = 0; i < len; ++i) {
      CHECK(w[i] > 0.0);
      CHECK(w[i] == doctest::Approx(w[len - 1 - i]).epsilon(1e-14));
    }
  }
}

TEST_CASE("smoothing: constant, identity, impulse") {
  Trajectory t;
  t.i_series.assign(120, 3.25);
  t.q_series.assign(120, -1.0);
  const Trajectory sc = smooth(t, 50);
  for (std::size_t k = 0; k < 120; ++k) {
    CHECK(sc.i_series[k] == doctest::Approx(3.25).epsilon(1e-13));
    CHECK(sc.q_series[k] == doctest::Approx(-1.0).epsilon(1e-13));
  }

  Rng rng(4);
  Trajectory r;
  for (int k = 0; k < 30; ++k) {
    r.i_series.push_back(rng.normal());
    r.q_series.push_back(rng.normal());
  }
  const Trajectory same = smooth(r, 1);
  CHECK(same.i_series == r.i_series);
  CHECK(same.q_series == r.q_series);

  // Impulse at p: output[n] = w[p - n + (M - 1) / 2] with the kernel
  // recomputed here from its defining formula.
  const std::size_t len = 200, m = 50, p = 100;
  std::vector<double> w(m);
  double total = 0;
  for (std::size_t k = 0; k < m; ++k) {
    w[k] = 0.5 - 0.5 * std::cos(2 * std::numbers::pi * static_cast<double>(k + 1) / static_cast<double>(m + 1));
    total += w[k];
  }
  for (double& x : w) x /= total;
  std::vector<double> impulse(len, 0.0);
  impulse[p] = 1.0;
  const auto out = smooth_series(impulse, m);
  double sum = 0;
  for (std::size_t n = 0; n < len; ++n) {
    const long k = static_cast<long>(p) - static_cast<long>(n) + static_cast<long>((m - 1) / 2);
    const double expect = (k >= 0 && k < static_cast<long>(m)) ? w[static_cast<std::size_t>(k)] : 0.0;
    CHECK(out[n] == doctest::Approx(expect).epsilon(1e-14));
    sum += out[n];
  }
  CHECK(std::abs(sum - 1.0) < 1e-12);
}

TEST_CASE("smoothing preserves the sum of interior-supported series") {
  Rng rng(12);
  std::vector<double> x(300, 0.0);
  for (std::size_t k = 60; k < 240; ++k) x[k] = rng.normal();
  const auto y = smooth_series(x, 50);
  CHECK(std::accumulate(y.begin(), y.end(), 0.0) == doctest::Approx(std::accumulate(x.begin(), x.end(), 0.0)).epsilon(1e-9));
}

TEST_CASE("window longer than the series is clamped and flagged") {
  Trajectory t;
  for (int k = 0; k < 20; ++k) {
    t.i_series.push_back(k);
    t.q_series.push_back(-k);
  }
  const Trajectory s = smooth(t, 50);
  CHECK(s.smoothing_clamped);
  CHECK(s.smoothing_window == 20);
  CHECK(s.size() == 20);
  CHECK_FALSE(smooth(t, 5).smoothing_clamped);
}

TEST_CASE("flatten and unflatten") {
  Trajectory t;
  t.i_series = {1, 2};
  t.q_series = {3, 4};
  t.label = 1;
  const FeatureVector fv = flatten(t);
  CHECK(fv.values == std::vector<double>{1, 2, 3, 4});
  CHECK(fv.label == 1);
  const Trajectory back = unflatten(fv, 16);
  CHECK(back.i_series == t.i_series);
  CHECK(back.q_series == t.q_series);
  CHECK(back.label == 1);
}

TEST_CASE("scaler endpoints, constant dimension and clamping") {
  std::vector<FeatureVector> train{{{0, 10, 7}, {}}, {{4, 20, 7}, {}}};
  const Scaler s = Scaler::fit(train);
  CHECK(s.apply(train[0]).values == std::vector<double>{0, 0, 0.5});
  CHECK(s.apply(train[1]).values == std::vector<double>{1, 1, 0.5});
  const FeatureVector below{{-3, 25, 100}, {}};
  CHECK(s.apply(below).values == std::vector<double>{0, 1, 0.5});
  Eigen::MatrixXd m(3, 2);
  m << 0, 4, 10, 20, 7, 7;
  const Scaler sm = Scaler::fit(m);
  CHECK(sm.min() == s.min());
  CHECK(sm.max() == s.max());
}

TEST_CASE("shuffle_split is disjoint, exhaustive and seeded") {
  const Split a = shuffle_split(101, 0.75, 5);
  CHECK(a.train.size() == 76);
  CHECK(a.test.size() == 25);
  std::vector<int> seen(101, 0);
  for (auto i : a.train) ++seen[i];
  for (auto i : a.test) ++seen[i];
  for (int v : seen) CHECK(v == 1);
  const Split b = shuffle_split(101, 0.75, 5);
  CHECK(a.train == b.train);
  CHECK(shuffle_split(101, 0.75, 6).train != a.train);
}

TEST_CASE("labelled dataset subset keeps the label multiset") {
  std::vector<FeatureVector> fvs;
  for (int k = 0; k < 10; ++k) fvs.push_back({{double(k), double(-k)}, k % 3});
  const LabeledDataset ds = LabeledDataset::from_features(fvs);
  CHECK(ds.dim() == 2);
  CHECK(ds.size() == 10);
  const Split sp = shuffle_split(10, 0.5, 1);
  const auto tr = ds.subset(sp.train), te = ds.subset(sp.test);
  std::vector<int> all = tr.labels;
  all.insert(all.end(), te.labels.begin(), te.labels.end());
  std::sort(all.begin(), all.end());
  std::vector<int> expect = ds.labels;
  std::sort(expect.begin(), expect.end());
  CHECK(all == expect);
  CHECK(distinct_labels(ds.labels) == std::vector<int>{0, 1, 2});
}

}
