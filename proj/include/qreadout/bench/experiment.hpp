#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "qreadout/clf/architecture.hpp"
#include "qreadout/clf/common.hpp"
#include "qreadout/dataset.hpp"
#include "qreadout/demod.hpp"
#include "qreadout/io/config_file.hpp"
#include "qreadout/metrics/metrics.hpp"
#include "qreadout/readout_sim.hpp"

namespace qreadout::bench {

enum class Method { gmm, ffnn, pretrann };

std::string to_string(Method m);
Method parse_method(const std::string& name);
std::vector<Method> parse_methods(const std::string& comma_list);

struct ExperimentConfig {
  sim::SimConfig sim = sim::SimConfig::defaults();
  std::vector<double> tm_list_ns{800, 1600, 2400, 3200, 4000, 4800, 5600, 6400, 7200, 8000};
  std::vector<Method> methods{Method::gmm, Method::ffnn, Method::pretrann};
  std::size_t repeats = 10;
  double split_fraction = 0.75;
  std::size_t shots_per_state = 8000;
  std::vector<int> states{0, 1};
  std::size_t smoothing_window = 50;
  clf::TrainingSettings training;
  clf::Fraction latent_fraction{1, 4};
  bool fine_tune = false;
  /// Regenerate the simulator data for every repeat instead of reusing it.
  bool fresh_data = false;
  std::size_t threads = 1;
  std::filesystem::path out_dir = "qreadout_out";
  /// When set, the repeat-0 model of every (method, T_m) cell is saved here.
  std::filesystem::path save_models_dir;

  /// Throws UsageError on violated invariants.
  void validate() const;
  /// Every result-affecting setting as sorted `key = value` lines (the
  /// config-file syntax). threads and output paths are excluded.
  std::string canonical_text() const;
  /// 16 hex digits of FNV-1a over canonical_text().
  std::string hash() const;
};

/// Applies every recognised key of `file` on top of `config`; unknown keys
/// are rejected. See README for the key list.
void apply_config(const io::ConfigFile& file, ExperimentConfig& config);

/// Smoothed, flattened trajectories (labelled by prepared state) and the
/// matching full-demodulation points for one T_m.
struct PreparedData {
  double tm_ns = 0.0;
  std::uint64_t data_seed = 0;
  dsp::LabeledDataset features;
  std::vector<dsp::IQPoint> iq;
  std::size_t smoothing_window = 1;
  bool smoothing_clamped = false;
};

/// Shot-by-shot simulation, demodulation and smoothing, parallel over shots.
/// Only the derived features are kept. `data_seed` replaces the simulator's
/// master seed.
PreparedData prepare_data(const ExperimentConfig& config, double tm_ns, std::size_t shots_per_state,
                          std::uint64_t data_seed);

/// Master seed of the simulator data used by `repeat` (differs per repeat
/// only with fresh_data).
std::uint64_t data_seed_for(const ExperimentConfig& config, std::size_t repeat);
std::uint64_t split_seed_for(const ExperimentConfig& config, double tm_ns, std::size_t repeat);
std::uint64_t model_seed_for(const ExperimentConfig& config, double tm_ns, Method method, std::size_t repeat);

/// Trains `method` on the train indices and scores it on the test indices.
/// Timing keys: train_s, classify_single_s, classify_batch100_s,
/// classify_batch10000_s.
metrics::EvalReport run_cell(const ExperimentConfig& config, const PreparedData& data, Method method,
                             std::size_t repeat, const dsp::Split& split);

struct BenchmarkRow {
  metrics::EvalReport report;
  std::uint64_t data_seed = 0;
  std::string config_hash;
};

struct SummaryRow {
  Method method = Method::gmm;
  double tm_ns = 0.0;
  std::size_t ok = 0;
  std::size_t failed = 0;
  double global_mean = 0.0;
  double global_std = 0.0;
  std::map<int, double> state_mean;
  std::map<int, double> state_std;
  std::map<std::string, double> timing_mean;
};

/// Every (T_m, method, repeat) cell. A cell that throws NumericError or
/// DataError is recorded as failed, warned about on `log`, and excluded from
/// the summary.
std::vector<BenchmarkRow> run_benchmark(const ExperimentConfig& config, std::ostream* log);

/// Mean and sample standard deviation over successful repeats, ordered by
/// method (as configured) then T_m.
std::vector<SummaryRow> summarize(const ExperimentConfig& config, const std::vector<BenchmarkRow>& rows);

struct LatentSweepRow {
  clf::Fraction fraction;
  std::size_t latent_dim = 0;
  std::size_t l1 = 0;
  std::size_t l2 = 0;
  std::size_t ok = 0;
  std::size_t failed = 0;
  double accuracy_mean = 0.0;
  double accuracy_std = 0.0;
  double loss_mean = 0.0;      // autoencoder training loss at its best epoch
  double loss_std = 0.0;
  double ae_train_s_mean = 0.0;
  double train_s_mean = 0.0;
};

/// PreTraNN at a single T_m for each latent fraction, `repeats` seeded
/// resamplings of the split and initialisation each.
std::vector<LatentSweepRow> run_latent_sweep(const ExperimentConfig& config, double tm_ns,
                                             const std::vector<clf::Fraction>& fractions, std::ostream* log);

struct DatasetSweepRow {
  std::size_t size = 0;
  std::size_t ok = 0;
  std::size_t failed = 0;
  double accuracy_mean = 0.0;
  double accuracy_std = 0.0;
  double train_s_mean = 0.0;
  double train_s_std = 0.0;
  /// Autoencoder epoch-loss curves, one per repeat, keyed "size<N>_r<k>".
  std::map<std::string, std::vector<double>> loss_curves;
};

/// PreTraNN trained on `size` training samples drawn from a fixed per-repeat
/// training pool and scored on that repeat's fixed test set.
std::vector<DatasetSweepRow> run_dataset_sweep(const ExperimentConfig& config, double tm_ns,
                                               const std::vector<std::size_t>& sizes, std::ostream* log);

}  // namespace qreadout::bench
