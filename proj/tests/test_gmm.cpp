#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <vector>

#include "qreadout/bench/experiment.hpp"
#include "qreadout/clf/gmm.hpp"
#include "qreadout/clf/model_io.hpp"
#include "qreadout/errors.hpp"
#include "qreadout/rng.hpp"

using namespace qreadout;
using namespace qreadout::clf;
using dsp::IQPoint;

namespace {

void two_clusters(std::size_t per, std::uint64_t seed, std::vector<IQPoint>& pts, std::vector<int>& labels) {
  Rng rng(seed);
  pts.clear();
  labels.clear();
  for (int lab = 0; lab < 2; ++lab) {
    const double cx = lab == 0 ? -5.0 : 5.0;
    for (std::size_t i = 0; i < per; ++i) {
      pts.push_back({cx + 0.1 * rng.normal(), 0.1 * rng.normal()});
      labels.push_back(lab);
    }
  }
}

}  // namespace

TEST_SUITE("gmm") {

TEST_CASE("one component equals the sample mean and covariance") {
  Rng rng(3);
  std::vector<IQPoint> pts;
  for (int i = 0; i < 500; ++i) {
    const double a = rng.normal(), b = rng.normal();
    pts.push_back({1.0 + 2 * a, -3.0 + 0.5 * a + b});
  }
  double mi = 0, mq = 0;
  for (const auto& p : pts) {
    mi += p.i;
    mq += p.q;
  }
  mi /= 500;
  mq /= 500;
  double sii = 0, siq = 0, sqq = 0;
  for (const auto& p : pts) {
    sii += (p.i - mi) * (p.i - mi);
    siq += (p.i - mi) * (p.q - mq);
    sqq += (p.q - mq) * (p.q - mq);
  }
  const GmmModel m = gmm_fit(pts, 1, 7);
  CHECK(m.weights[0] == doctest::Approx(1.0));
  CHECK(m.means[0](0) == doctest::Approx(mi).epsilon(1e-12));
  CHECK(m.means[0](1) == doctest::Approx(mq).epsilon(1e-12));
  CHECK(m.covariances[0](0, 0) == doctest::Approx(sii / 500 + 1e-6).epsilon(1e-12));
  CHECK(m.covariances[0](0, 1) == doctest::Approx(siq / 500).epsilon(1e-12));
  CHECK(m.covariances[0](1, 1) == doctest::Approx(sqq / 500 + 1e-6).epsilon(1e-12));
}

TEST_CASE("two clusters at (+-5, 0) are recovered") {
  std::vector<IQPoint> pts, fresh;
  std::vector<int> labels, fresh_labels;
  two_clusters(1000, 1, pts, labels);
  GmmModel m = gmm_assign_labels(gmm_fit(pts, 2, 5), pts, labels);
  for (std::size_t c = 0; c < 2; ++c) {
    const double cx = m.labels[c] == 0 ? -5.0 : 5.0;
    CHECK(std::abs(m.means[c](0) - cx) < 0.05);
    CHECK(std::abs(m.means[c](1)) < 0.05);
    CHECK(std::abs(m.weights[c] - 0.5) < 0.05);
  }
  CHECK(m.labels[0] != m.labels[1]);
  two_clusters(5000, 2, fresh, fresh_labels);
  const auto preds = gmm_predict_batch(m, fresh);
  std::size_t ok = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) ok += preds[i] == fresh_labels[i];
  CHECK(static_cast<double>(ok) / static_cast<double>(preds.size()) >= 0.999);
  CHECK(gmm_predict(m, {-5.0, 0.0}) == 0);
  CHECK(gmm_predict(m, {5.0, 0.0}) == 1);
}

TEST_CASE("EM log-likelihood never decreases") {
  Rng rng(9);
  std::vector<IQPoint> pts;
  for (int i = 0; i < 1500; ++i) {
    const int c = static_cast<int>(rng.below(3));
    pts.push_back({c * 1.2 + rng.normal(), (c == 1 ? 1.0 : -0.5) + 0.7 * rng.normal()});
  }
  GmmOptions opt;
  opt.tolerance = 0.0;
  opt.max_iterations = 60;
  const GmmModel m = gmm_fit(pts, 3, 4, opt);
  REQUIRE(m.log_likelihood.size() >= 2);
  for (std::size_t i = 1; i < m.log_likelihood.size(); ++i) {
    CHECK(m.log_likelihood[i] >= m.log_likelihood[i - 1] - 1e-9);
  }
  double wsum = 0;
  for (double w : m.weights) wsum += w;
  CHECK(wsum == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(m.mean_log_likelihood(pts) == doctest::Approx(m.log_likelihood.back()).epsilon(1e-12));
}

TEST_CASE("fitting is deterministic and validates its input") {
  std::vector<IQPoint> pts;
  std::vector<int> labels;
  two_clusters(200, 4, pts, labels);
  const GmmModel a = gmm_fit(pts, 2, 8), b = gmm_fit(pts, 2, 8);
  CHECK(a.means == b.means);
  CHECK(a.log_likelihood == b.log_likelihood);
  const std::vector<IQPoint> same(10, IQPoint{1.0, 1.0});
  CHECK_THROWS_AS(gmm_fit(same, 2, 1), UsageError);
  CHECK_THROWS_AS(gmm_predict(a, {0, 0}), UsageError);
}

TEST_CASE("label map: majority, ties and empty components") {
  GmmModel m;
  m.weights = {1.0 / 3, 1.0 / 3, 1.0 / 3};
  m.means = {Eigen::Vector2d(0, 0), Eigen::Vector2d(10, 0), Eigen::Vector2d(100, 0)};
  m.covariances.assign(3, Eigen::Matrix2d::Identity());
  // Component 0 wins three points (labels 1, 1, 0), component 1 wins two
  // (labels 0 and 1: a tie), component 2 wins nothing.
  const std::vector<IQPoint> pts{{0, 0}, {0.1, 0}, {-0.1, 0}, {10, 0}, {10.1, 0}};
  const std::vector<int> labels{1, 1, 0, 1, 0};
  const GmmModel l = gmm_assign_labels(m, pts, labels);
  CHECK(l.labels == std::vector<int>{1, 0, 0});
  CHECK(gmm_predict(l, {99.0, 0.0}) == 0);
  CHECK(gmm_predict(l, {0.0, 0.0}) == 1);
}

TEST_CASE("equal posteriors go to the lower label") {
  GmmModel m;
  m.weights = {0.5, 0.5};
  m.means = {Eigen::Vector2d(1, 0), Eigen::Vector2d(-1, 0)};
  m.covariances.assign(2, Eigen::Matrix2d::Identity());
  m.labels = {1, 0};
  CHECK(gmm_predict(m, {0.0, 3.0}) == 0);
}

TEST_CASE("prediction is invariant under a global translation") {
  std::vector<IQPoint> pts;
  std::vector<int> labels;
  Rng rng(12);
  for (int i = 0; i < 600; ++i) {
    const int lab = i % 2;
    pts.push_back({lab * 1.5 + rng.normal(), 0.3 * rng.normal()});
    labels.push_back(lab);
  }
  const GmmModel m = gmm_assign_labels(gmm_fit(pts, 2, 2), pts, labels);
  GmmModel shifted = m;
  const Eigen::Vector2d t(37.5, -12.25);
  for (auto& mu : shifted.means) mu += t;
  for (const auto& p : pts) {
    CHECK(gmm_predict(m, p) == gmm_predict(shifted, {p.i + t(0), p.q + t(1)}));
  }
}

TEST_CASE("three-state simulator data maps every label") {
  bench::ExperimentConfig cfg;
  cfg.states = {0, 1, 2};
  const auto data = bench::prepare_data(cfg, 3200, 500, cfg.sim.master_seed);
  const GmmModel m = gmm_assign_labels(gmm_fit(data.iq, 3, 1), data.iq, data.features.labels);
  std::vector<int> sorted = m.labels;
  std::sort(sorted.begin(), sorted.end());
  CHECK(sorted == std::vector<int>{0, 1, 2});
}

TEST_CASE("GMM models survive a save/load round trip") {
  std::vector<IQPoint> pts;
  std::vector<int> labels;
  two_clusters(100, 6, pts, labels);
  const GmmModel m = gmm_assign_labels(gmm_fit(pts, 2, 3), pts, labels);
  const auto path = std::filesystem::temp_directory_path() / "qreadout_gmm_roundtrip.qrd";
  save_model(path, m);
  const GmmModel back = std::get<GmmModel>(load_model(path).model);
  CHECK(back.means == m.means);
  CHECK(back.covariances == m.covariances);
  CHECK(back.weights == m.weights);
  CHECK(back.labels == m.labels);
  std::filesystem::remove(path);
}

}
