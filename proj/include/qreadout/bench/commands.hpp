#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "qreadout/bench/experiment.hpp"
#include "qreadout/bench/report.hpp"
#include "qreadout/clf/architecture.hpp"

namespace qreadout::bench {

/// Flags shared by the experiment subcommands; unset flags keep the config
/// file (or built-in default) value.
struct CommonFlags {
  std::optional<std::filesystem::path> config;
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> out_dir;
  std::optional<std::string> tm;
  std::optional<std::string> methods;
  std::optional<std::size_t> repeats;
  std::optional<std::size_t> threads;
  std::optional<std::size_t> shots_per_state;
  std::optional<std::string> states;
  bool fresh_data = false;
};

/// Defaults, then the config file, then flags; validated.
ExperimentConfig build_config(const CommonFlags& flags);

/// Per T_m: raw_tm<T>.qrd, traj_tm<T>.qrd and iq_tm<T>.csv in out_dir.
void cmd_generate(const ExperimentConfig& config, std::ostream& log);

/// benchmark_rows.csv, benchmark_summary.csv, benchmark_report.json.
void cmd_benchmark(const ExperimentConfig& config, std::ostream& log);

/// sweep_latent.csv at a single T_m.
void cmd_sweep_latent(const ExperimentConfig& config, double tm_ns, const std::vector<clf::Fraction>& fractions,
                      std::ostream& log);

/// sweep_dataset.csv and sweep_dataset_loss_curves.csv at a single T_m.
void cmd_sweep_dataset(const ExperimentConfig& config, double tm_ns, const std::vector<std::size_t>& sizes,
                       std::ostream& log);

struct ProbeRequest {
  std::filesystem::path model;
  std::filesystem::path dataset;  // QRD-TRAJ
  std::size_t shot = 0;
  std::size_t component = 0;
  std::vector<double> values;
  std::filesystem::path output;
};

/// CSV rows: the scaled input, the unmodified reconstruction, then one row per
/// probe value; columns i_0.., q_0.. in scaled units.
void cmd_latent_probe(const ProbeRequest& request, std::ostream& log);

void cmd_compare(const std::vector<std::filesystem::path>& reports, const CompareOptions& options,
                 const std::filesystem::path& output, std::ostream& log);

/// Header, record count and checksum status of a QRD file, as JSON.
void cmd_inspect(const std::filesystem::path& path, std::ostream& out);

/// Default sweep grids.
std::vector<clf::Fraction> default_latent_fractions();
std::vector<std::size_t> default_dataset_sizes();

}  // namespace qreadout::bench
