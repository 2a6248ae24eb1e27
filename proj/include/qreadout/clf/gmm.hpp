#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "qreadout/demod.hpp"

namespace qreadout::clf {

struct GmmOptions {
  double tolerance = 1e-3;        // stop when mean log-likelihood gains less
  std::size_t max_iterations = 100;
  double regularization = 1e-6;   // added to covariance diagonals each M-step
  std::size_t kmeans_iterations = 100;
};

/// Full-covariance Gaussian mixture on the I-Q plane.
struct GmmModel {
  std::vector<double> weights;
  std::vector<Eigen::Vector2d> means;
  std::vector<Eigen::Matrix2d> covariances;
  /// Component -> label; empty until gmm_assign_labels.
  std::vector<int> labels;
  /// Mean log-likelihood after initialisation and after each EM iteration.
  std::vector<double> log_likelihood;
  std::size_t iterations = 0;
  bool converged = false;

  std::size_t components() const { return weights.size(); }
  bool labeled() const { return labels.size() == weights.size() && !labels.empty(); }

  /// log(pi_k N(p; mu_k, Sigma_k)) for every component.
  Eigen::VectorXd log_joint(const dsp::IQPoint& p) const;
  /// Component with the largest posterior; ties to the lowest index.
  std::size_t best_component(const dsp::IQPoint& p) const;
  /// Mean log-likelihood of a point set under the mixture.
  double mean_log_likelihood(std::span<const dsp::IQPoint> points) const;
};

/// EM from a seeded k-means++ / Lloyd start. Throws UsageError with fewer
/// than k distinct points and NumericError if a component's responsibility
/// mass collapses.
GmmModel gmm_fit(std::span<const dsp::IQPoint> points, std::size_t k, std::uint64_t seed,
                 const GmmOptions& options = {});

/// Majority label among the training points each component wins (ties to
/// the lower label). A component that wins nothing takes the label of the
/// nearest component (by mean distance) that did.
GmmModel gmm_assign_labels(GmmModel model, std::span<const dsp::IQPoint> points,
                           std::span<const int> labels);

/// Label of the maximum-posterior component; among equal posteriors the
/// lower label wins. Throws UsageError for an unlabeled model.
int gmm_predict(const GmmModel& model, const dsp::IQPoint& p);
std::vector<int> gmm_predict_batch(const GmmModel& model, std::span<const dsp::IQPoint> points);

}  // namespace qreadout::clf
