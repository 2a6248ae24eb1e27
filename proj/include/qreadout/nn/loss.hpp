#pragma once

#include <span>

namespace qreadout::nn {

inline constexpr double kProbabilityFloor = 1e-12;

/// (1/d) sum (x - x_hat)^2. Throws UsageError on length mismatch or empty input.
double mse_loss(std::span<const double> x, std::span<const double> x_hat);

/// -sum y log(max(y_hat, 1e-12)). y must be one-hot and y_hat a probability
/// vector (entries in [0, 1], sum 1 within 1e-9); otherwise UsageError.
double cross_entropy_loss(std::span<const double> y, std::span<const double> y_hat);

}  // namespace qreadout::nn
