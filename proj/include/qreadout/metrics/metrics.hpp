#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace qreadout::metrics {

/// Share of correctly predicted samples for every state in `states`.
/// Throws DataError when a state has no samples or lengths differ.
std::map<int, double> per_state_accuracy(std::span<const int> preds, std::span<const int> labels,
                                         std::span<const int> states);
/// Same, over the states present in `labels`.
std::map<int, double> per_state_accuracy(std::span<const int> preds, std::span<const int> labels);

/// Unweighted mean over states. Throws UsageError on an empty map.
double global_accuracy(const std::map<int, double>& per_state);

struct ConfusionMatrix {
  Eigen::MatrixXd rates;             // rows: prepared, columns: predicted
  std::vector<std::size_t> row_counts;
  std::vector<bool> empty_rows;
};

/// Row-normalised counts; empty rows stay zero and are flagged.
/// Throws DataError for a label or prediction outside [0, n_states).
ConfusionMatrix confusion_matrix(std::span<const int> preds, std::span<const int> labels,
                                 std::size_t n_states);

struct EvalReport {
  std::string method;
  double tm_ns = 0.0;
  std::size_t repeat = 0;
  std::uint64_t split_seed = 0;
  std::uint64_t model_seed = 0;
  std::map<int, double> per_state;
  double global = 0.0;
  ConfusionMatrix confusion;
  std::size_t n_test = 0;
  std::map<std::string, double> timing_s;
  bool failed = false;
  std::string failure;
};

/// Fills per-state, global and confusion fields from predictions on labels in [0, n_states).
void score(EvalReport& report, std::span<const int> preds, std::span<const int> labels, std::size_t n_states);

}  // namespace qreadout::metrics
