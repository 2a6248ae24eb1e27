#include "qreadout/nn/loss.hpp"

#include <algorithm>
#include <cmath>

#include "qreadout/errors.hpp"

namespace qreadout::nn {

double mse_loss(std::span<const double> x, std::span<const double> x_hat) {
  if (x.size() != x_hat.size()) throw UsageError("mse_loss: length mismatch");
  if (x.empty()) throw UsageError("mse_loss: empty input");
  double acc = 0.0;
  for (std::size_t t = 0; t < x.size(); ++t) {
    const double r = x[t] - x_hat[t];
    acc += r * r;
  }
  return acc / static_cast<double>(x.size());
}

double cross_entropy_loss(std::span<const double> y, std::span<const double> y_hat) {
  if (y.size() != y_hat.size() || y.empty()) throw UsageError("cross_entropy_loss: length mismatch");
  std::size_t hot = 0;
  for (double v : y) {
    if (v == 1.0) {
      ++hot;
    } else if (v != 0.0) {
      throw UsageError("cross_entropy_loss: target is not one-hot");
    }
  }
  if (hot != 1) throw UsageError("cross_entropy_loss: target is not one-hot");
  double total = 0.0;
  for (double p : y_hat) {
    if (!(p >= 0.0 && p <= 1.0)) throw UsageError("cross_entropy_loss: probability out of [0, 1]");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) throw UsageError("cross_entropy_loss: probabilities do not sum to 1");
  double loss = 0.0;
  for (std::size_t c = 0; c < y.size(); ++c) {
    if (y[c] != 0.0) loss -= y[c] * std::log(std::max(y_hat[c], kProbabilityFloor));
  }
  return loss;
}

}  // namespace qreadout::nn
