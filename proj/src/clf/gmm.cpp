#include "qreadout/clf/gmm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>

#include "qreadout/errors.hpp"
#include "qreadout/rng.hpp"

namespace qreadout::clf {

namespace {

Eigen::Vector2d vec(const dsp::IQPoint& p) { return {p.i, p.q}; }

double log_gaussian(const Eigen::Vector2d& x, const Eigen::Vector2d& mu, const Eigen::Matrix2d& cov) {
  const double det = cov(0, 0) * cov(1, 1) - cov(0, 1) * cov(1, 0);
  if (!(det > 0.0)) throw NumericError("GMM covariance is not positive definite");
  const Eigen::Vector2d d = x - mu;
  // Explicit 2x2 inverse keeps the arithmetic order fixed.
  const double m = (cov(1, 1) * d[0] * d[0] - (cov(0, 1) + cov(1, 0)) * d[0] * d[1] + cov(0, 0) * d[1] * d[1]) / det;
  return -std::log(2.0 * std::numbers::pi) - 0.5 * std::log(det) - 0.5 * m;
}

double log_sum_exp(const Eigen::VectorXd& v) {
  const double top = v.maxCoeff();
  if (!std::isfinite(top)) return top;
  return top + std::log((v.array() - top).exp().sum());
}

std::size_t nearest(const std::vector<Eigen::Vector2d>& centers, const Eigen::Vector2d& x) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centers.size(); ++c) {
    const double d = (x - centers[c]).squaredNorm();
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

// k-means++ seeding followed by Lloyd iterations; returns hard assignments.
std::vector<std::size_t> kmeans(const std::vector<Eigen::Vector2d>& x, std::size_t k, Rng& rng,
                                std::size_t max_iter, std::vector<Eigen::Vector2d>& centers) {
  const std::size_t n = x.size();
  centers.clear();
  centers.push_back(x[static_cast<std::size_t>(rng.below(n))]);
  std::vector<double> d2(n);
  while (centers.size() < k) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = (x[i] - centers[nearest(centers, x[i])]).squaredNorm();
      total += d2[i];
    }
    std::size_t pick = n - 1;
    const double target = rng.uniform() * total;
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      acc += d2[i];
      if (acc > target && d2[i] > 0.0) {
        pick = i;
        break;
      }
    }
    if (d2[pick] == 0.0) {
      // Floating-point edge: fall back to the farthest point.
      pick = static_cast<std::size_t>(std::max_element(d2.begin(), d2.end()) - d2.begin());
    }
    centers.push_back(x[pick]);
  }

  std::vector<std::size_t> assign(n, k);
  for (std::size_t it = 0; it < max_iter; ++it) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t c = nearest(centers, x[i]);
      if (c != assign[i]) {
        assign[i] = c;
        changed = true;
      }
    }
    if (!changed) break;
    std::vector<Eigen::Vector2d> sum(k, Eigen::Vector2d::Zero());
    std::vector<std::size_t> count(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      sum[assign[i]] += x[i];
      ++count[assign[i]];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (count[c]) centers[c] = sum[c] / static_cast<double>(count[c]);
    }
  }
  return assign;
}

Eigen::Matrix2d covariance(const std::vector<Eigen::Vector2d>& x, const Eigen::VectorXd& resp,
                           const Eigen::Vector2d& mean, double mass) {
  Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
  for (std::size_t i = 0; i < x.size(); ++i) {
    const Eigen::Vector2d d = x[i] - mean;
    cov.noalias() += resp[static_cast<Eigen::Index>(i)] * (d * d.transpose());
  }
  return cov / mass;
}

}  // namespace

Eigen::VectorXd GmmModel::log_joint(const dsp::IQPoint& p) const {
  const Eigen::Vector2d x = vec(p);
  Eigen::VectorXd out(static_cast<Eigen::Index>(components()));
  for (std::size_t c = 0; c < components(); ++c) {
    out[static_cast<Eigen::Index>(c)] = std::log(weights[c]) + log_gaussian(x, means[c], covariances[c]);
  }
  return out;
}

std::size_t GmmModel::best_component(const dsp::IQPoint& p) const {
  const Eigen::VectorXd lj = log_joint(p);
  std::size_t best = 0;
  for (std::size_t c = 1; c < components(); ++c) {
    if (lj[static_cast<Eigen::Index>(c)] > lj[static_cast<Eigen::Index>(best)]) best = c;
  }
  return best;
}

double GmmModel::mean_log_likelihood(std::span<const dsp::IQPoint> points) const {
  double total = 0.0;
  for (const auto& p : points) total += log_sum_exp(log_joint(p));
  return total / static_cast<double>(points.size());
}

GmmModel gmm_fit(std::span<const dsp::IQPoint> points, std::size_t k, std::uint64_t seed,
                 const GmmOptions& options) {
  if (k < 1) throw UsageError("GMM needs at least one component");
  std::vector<Eigen::Vector2d> x;
  x.reserve(points.size());
  for (const auto& p : points) {
    if (!std::isfinite(p.i) || !std::isfinite(p.q)) throw DataError("non-finite I-Q point");
    x.push_back(vec(p));
  }
  {
    std::vector<std::pair<double, double>> distinct;
    for (const auto& p : points) distinct.emplace_back(p.i, p.q);
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    if (distinct.size() < k) {
      throw UsageError("GMM with " + std::to_string(k) + " components needs at least that many distinct points");
    }
  }
  const std::size_t n = x.size();
  const double reg = options.regularization;

  Rng rng(seed);
  std::vector<Eigen::Vector2d> centers;
  const std::vector<std::size_t> assign = kmeans(x, k, rng, options.kmeans_iterations, centers);

  GmmModel model;
  model.weights.assign(k, 0.0);
  model.means = centers;
  model.covariances.assign(k, Eigen::Matrix2d::Zero());
  {
    // Initial parameters from the hard k-means partition.
    Eigen::Vector2d global_mean = Eigen::Vector2d::Zero();
    for (const auto& v : x) global_mean += v;
    global_mean /= static_cast<double>(n);
    const Eigen::Matrix2d global_cov =
        covariance(x, Eigen::VectorXd::Ones(static_cast<Eigen::Index>(n)), global_mean, static_cast<double>(n));
    for (std::size_t c = 0; c < k; ++c) {
      Eigen::VectorXd r = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
      double mass = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (assign[i] == c) {
          r[static_cast<Eigen::Index>(i)] = 1.0;
          mass += 1.0;
        }
      }
      model.weights[c] = std::max(mass, 1.0) / static_cast<double>(n);
      model.covariances[c] = (mass >= 2.0 ? covariance(x, r, centers[c], mass) : global_cov) +
                             reg * Eigen::Matrix2d::Identity();
    }
    double wsum = 0.0;
    for (double w : model.weights) wsum += w;
    for (double& w : model.weights) w /= wsum;
  }

  Eigen::MatrixXd resp(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(n));
  auto e_step = [&]() {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      Eigen::VectorXd lj(static_cast<Eigen::Index>(k));
      for (std::size_t c = 0; c < k; ++c) {
        lj[static_cast<Eigen::Index>(c)] = std::log(model.weights[c]) + log_gaussian(x[i], model.means[c], model.covariances[c]);
      }
      const double lse = log_sum_exp(lj);
      total += lse;
      resp.col(static_cast<Eigen::Index>(i)) = (lj.array() - lse).exp();
    }
    return total / static_cast<double>(n);
  };

  double ll = e_step();
  model.log_likelihood.push_back(ll);
  const double collapse = static_cast<double>(n) * std::numeric_limits<double>::epsilon();
  for (std::size_t it = 0; it < options.max_iterations; ++it) {
    for (std::size_t c = 0; c < k; ++c) {
      const Eigen::VectorXd r = resp.row(static_cast<Eigen::Index>(c)).transpose();
      const double mass = r.sum();
      if (!(mass > collapse)) {
        throw NumericError("GMM component " + std::to_string(c) + " collapsed (responsibility mass " +
                           std::to_string(mass) + ")");
      }
      Eigen::Vector2d mean = Eigen::Vector2d::Zero();
      for (std::size_t i = 0; i < n; ++i) mean += r[static_cast<Eigen::Index>(i)] * x[i];
      mean /= mass;
      model.weights[c] = mass / static_cast<double>(n);
      model.means[c] = mean;
      model.covariances[c] = covariance(x, r, mean, mass) + reg * Eigen::Matrix2d::Identity();
    }
    const double next = e_step();
    if (!std::isfinite(next)) throw NumericError("GMM log-likelihood is not finite");
    model.log_likelihood.push_back(next);
    model.iterations = it + 1;
    const double gain = next - ll;
    ll = next;
    if (gain < options.tolerance) {
      model.converged = true;
      break;
    }
  }
  return model;
}

GmmModel gmm_assign_labels(GmmModel model, std::span<const dsp::IQPoint> points, std::span<const int> labels) {
  if (points.size() != labels.size()) throw UsageError("gmm_assign_labels: points and labels differ in length");
  if (points.empty()) throw UsageError("gmm_assign_labels: no training points");
  const std::size_t k = model.components();
  std::vector<std::map<int, std::size_t>> votes(k);
  for (std::size_t i = 0; i < points.size(); ++i) ++votes[model.best_component(points[i])][labels[i]];

  model.labels.assign(k, 0);
  std::vector<bool> won(k, false);
  for (std::size_t c = 0; c < k; ++c) {
    std::size_t best_count = 0;
    for (const auto& [label, count] : votes[c]) {  // ascending label order: ties keep the lower
      if (count > best_count) {
        best_count = count;
        model.labels[c] = label;
      }
    }
    won[c] = best_count > 0;
  }
  for (std::size_t c = 0; c < k; ++c) {
    if (won[c]) continue;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t o = 0; o < k; ++o) {
      if (!won[o]) continue;
      const double d = (model.means[c] - model.means[o]).squaredNorm();
      if (d < best_d) {
        best_d = d;
        model.labels[c] = model.labels[o];
      }
    }
  }
  return model;
}

int gmm_predict(const GmmModel& model, const dsp::IQPoint& p) {
  if (!model.labeled()) throw UsageError("GMM model has no component labels");
  const Eigen::VectorXd lj = model.log_joint(p);
  std::size_t best = 0;
  for (std::size_t c = 1; c < model.components(); ++c) {
    const double a = lj[static_cast<Eigen::Index>(c)];
    const double b = lj[static_cast<Eigen::Index>(best)];
    if (a > b || (a == b && model.labels[c] < model.labels[best])) best = c;
  }
  return model.labels[best];
}

std::vector<int> gmm_predict_batch(const GmmModel& model, std::span<const dsp::IQPoint> points) {
  std::vector<int> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(gmm_predict(model, p));
  return out;
}

}  // namespace qreadout::clf
