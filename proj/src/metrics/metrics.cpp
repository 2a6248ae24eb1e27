#include "qreadout/metrics/metrics.hpp"

#include <algorithm>

#include "qreadout/errors.hpp"

namespace qreadout::metrics {

std::map<int, double> per_state_accuracy(std::span<const int> preds, std::span<const int> labels,
                                         std::span<const int> states) {
  if (preds.size() != labels.size()) throw DataError("predictions and labels differ in length");
  std::map<int, std::pair<std::size_t, std::size_t>> tally;  // state -> (hits, total)
  for (int s : states) tally[s] = {0, 0};
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto it = tally.find(labels[i]);
    if (it == tally.end()) continue;
    ++it->second.second;
    if (preds[i] == labels[i]) ++it->second.first;
  }
  std::map<int, double> out;
  for (const auto& [s, ht] : tally) {
    if (ht.second == 0) throw DataError("state " + std::to_string(s) + " has no labelled samples");
    out[s] = static_cast<double>(ht.first) / static_cast<double>(ht.second);
  }
  return out;
}

std::map<int, double> per_state_accuracy(std::span<const int> preds, std::span<const int> labels) {
  std::vector<int> states(labels.begin(), labels.end());
  std::sort(states.begin(), states.end());
  states.erase(std::unique(states.begin(), states.end()), states.end());
  return per_state_accuracy(preds, labels, states);
}

double global_accuracy(const std::map<int, double>& per_state) {
  if (per_state.empty()) throw UsageError("global accuracy of an empty state map");
  double sum = 0.0;
  for (const auto& [s, a] : per_state) sum += a;
  return sum / static_cast<double>(per_state.size());
}

ConfusionMatrix confusion_matrix(std::span<const int> preds, std::span<const int> labels, std::size_t n_states) {
  if (preds.size() != labels.size()) throw DataError("predictions and labels differ in length");
  const auto n = static_cast<Eigen::Index>(n_states);
  ConfusionMatrix cm;
  cm.rates = Eigen::MatrixXd::Zero(n, n);
  cm.row_counts.assign(n_states, 0);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int l = labels[i];
    const int p = preds[i];
    if (l < 0 || l >= n || p < 0 || p >= n) {
      throw DataError("label or prediction outside [0, " + std::to_string(n_states) + ")");
    }
    cm.rates(l, p) += 1.0;
    ++cm.row_counts[static_cast<std::size_t>(l)];
  }
  cm.empty_rows.assign(n_states, false);
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto count = cm.row_counts[static_cast<std::size_t>(r)];
    if (count == 0) {
      cm.empty_rows[static_cast<std::size_t>(r)] = true;
    } else {
      cm.rates.row(r) /= static_cast<double>(count);
    }
  }
  return cm;
}

void score(EvalReport& report, std::span<const int> preds, std::span<const int> labels, std::size_t n_states) {
  std::vector<int> states(n_states);
  for (std::size_t s = 0; s < n_states; ++s) states[s] = static_cast<int>(s);
  report.per_state = per_state_accuracy(preds, labels, states);
  report.global = global_accuracy(report.per_state);
  report.confusion = confusion_matrix(preds, labels, n_states);
  report.n_test = labels.size();
}

}  // namespace qreadout::metrics
