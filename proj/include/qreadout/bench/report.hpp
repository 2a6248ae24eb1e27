#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qreadout/bench/experiment.hpp"

namespace qreadout::bench {

/// Timing columns are always the trailing columns of a rows CSV.
inline const std::vector<std::string> kTimingColumns{"train_s", "classify_single_s", "classify_batch100_s",
                                                     "classify_batch10000_s"};

/// One line per (method, T_m, repeat); seeds and config hash on every row.
std::string rows_csv(const ExperimentConfig& config, const std::vector<BenchmarkRow>& rows);
/// mean and std per (method, T_m).
std::string summary_csv(const ExperimentConfig& config, const std::vector<SummaryRow>& summary);
nlohmann::json report_json(const ExperimentConfig& config, const std::vector<BenchmarkRow>& rows,
                           const std::vector<SummaryRow>& summary);

/// Drops the timing columns from a rows CSV so two runs can be compared.
std::string strip_timing(const std::string& rows_csv_text);

std::string latent_sweep_csv(const ExperimentConfig& config, double tm_ns, const std::vector<LatentSweepRow>& rows);
std::string dataset_sweep_csv(const ExperimentConfig& config, double tm_ns, const std::vector<DatasetSweepRow>& rows);
/// curve_id,epoch,loss.
std::string loss_curves_csv(const std::vector<DatasetSweepRow>& rows);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

/// Mean global accuracy per (method, T_m) as read back from a report.
struct ReportSummary {
  std::string name;
  std::string config_hash;
  std::vector<double> tm_list_ns;
  std::map<std::string, std::map<double, double>> global_mean;  // method -> tm -> accuracy

  double at(const std::string& method, double tm) const;
};

/// Throws DataError for a malformed report.
ReportSummary read_report(const std::filesystem::path& path);

struct CompareOptions {
  std::string method_a = "pretrann";
  std::string method_b = "gmm";
  /// Compare method_a between the two reports instead of a vs b within each.
  bool across = false;
  /// Lower edge of the medium-long T_m subrange.
  double medium_long_from_ns = 2400.0;
};

/// kind,report,tm_ns,a,b,diff_pp rows. Percentage points are 100 * (a - b).
/// Throws DataError when reports disagree on the T_m grid or lack a method.
std::string compare_csv(const std::vector<ReportSummary>& reports, const CompareOptions& options);

}  // namespace qreadout::bench
