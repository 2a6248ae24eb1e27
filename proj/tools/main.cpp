// qreadout: synthetic qubit-readout generator and classifier benchmark.

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qreadout/bench/commands.hpp"
#include "qreadout/errors.hpp"
#include "qreadout/io/config_file.hpp"

namespace {

using namespace qreadout;

void add_common(CLI::App* cmd, bench::CommonFlags& f) {
  cmd->add_option("--config", f.config, "key = value config file")->check(CLI::ExistingFile);
  cmd->add_option("--seed", f.seed, "master seed");
  cmd->add_option("--out-dir", f.out_dir, "output directory");
  cmd->add_option("--tm", f.tm, "measurement durations in ns, comma separated");
  cmd->add_option("--methods", f.methods, "comma list of gmm, ffnn, pretrann");
  cmd->add_option("--repeats", f.repeats, "repeats per cell");
  cmd->add_option("--threads", f.threads, "worker threads (0 = all cores)");
  cmd->add_option("--shots-per-state", f.shots_per_state, "shots simulated per state");
  cmd->add_option("--states", f.states, "comma list of prepared states, e.g. 0,1,2");
  cmd->add_flag("--fresh-data", f.fresh_data, "regenerate simulator data for every repeat");
}

double single_tm(const bench::ExperimentConfig& c, const bench::CommonFlags& f, double fallback) {
  if (!f.tm) return fallback;
  if (c.tm_list_ns.size() != 1) throw UsageError("sweeps take a single --tm value");
  return c.tm_list_ns.front();
}

int run(int argc, char** argv) {
  CLI::App app{"Synthetic dispersive-readout generator and state-classifier benchmark"};
  app.require_subcommand(1);
  bench::CommonFlags flags;

  auto* generate = app.add_subcommand("generate", "simulate shots and write QRD-RAW, QRD-TRAJ and I-Q CSV files");
  add_common(generate, flags);

  std::string save_models;
  auto* benchmark = app.add_subcommand("benchmark", "train and score every (T_m, method, repeat) cell");
  add_common(benchmark, flags);
  benchmark->add_option("--save-models", save_models, "directory for the repeat-0 models");

  std::string fractions;
  auto* sweep_latent = app.add_subcommand("sweep-latent", "PreTraNN accuracy and loss versus latent size");
  add_common(sweep_latent, flags);
  sweep_latent->add_option("--fractions", fractions, "latent fractions, e.g. 1,1/1.3,1/2,1/4");

  std::string sizes;
  auto* sweep_dataset = app.add_subcommand("sweep-dataset", "PreTraNN accuracy and training time versus dataset size");
  add_common(sweep_dataset, flags);
  sweep_dataset->add_option("--sizes", sizes, "training-set sizes, comma separated");

  bench::ProbeRequest probe;
  std::string probe_values;
  auto* latent_probe = app.add_subcommand("latent-probe", "decode a shot with one latent component swept");
  latent_probe->add_option("--model", probe.model, "PreTraNN model file")->required();
  latent_probe->add_option("--dataset", probe.dataset, "QRD-TRAJ file")->required();
  latent_probe->add_option("--shot", probe.shot, "record index");
  latent_probe->add_option("--component", probe.component, "latent component index");
  latent_probe->add_option("--values", probe_values, "probe values in [-1, 1], comma separated")->required();
  latent_probe->add_option("--out", probe.output, "output CSV")->default_val("latent_probe.csv");

  std::vector<std::string> reports;
  bench::CompareOptions compare_options;
  std::string compare_out = "compare.csv";
  auto* compare = app.add_subcommand("compare", "percentage-point differences between methods or reports");
  compare->add_option("--report", reports, "benchmark_report.json (one or two)")->required();
  compare->add_option("--method-a", compare_options.method_a, "minuend method")->default_val("pretrann");
  compare->add_option("--method-b", compare_options.method_b, "subtrahend method")->default_val("gmm");
  compare->add_flag("--across", compare_options.across, "compare method-a between two reports");
  compare->add_option("--out", compare_out, "output CSV");

  std::string inspect_path;
  auto* inspect = app.add_subcommand("inspect", "print and verify a QRD file header");
  inspect->add_option("file", inspect_path, "QRD file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  std::ostream& log = std::cerr;
  if (generate->parsed()) {
    bench::cmd_generate(bench::build_config(flags), log);
  } else if (benchmark->parsed()) {
    bench::ExperimentConfig c = bench::build_config(flags);
    c.save_models_dir = save_models;
    bench::cmd_benchmark(c, log);
  } else if (sweep_latent->parsed()) {
    const bench::ExperimentConfig c = bench::build_config(flags);
    std::vector<clf::Fraction> fs = bench::default_latent_fractions();
    if (!fractions.empty()) {
      fs.clear();
      for (const auto& s : io::split_list(fractions)) fs.push_back(clf::parse_fraction(s));
    }
    bench::cmd_sweep_latent(c, single_tm(c, flags, 2400.0), fs, log);
  } else if (sweep_dataset->parsed()) {
    const bench::ExperimentConfig c = bench::build_config(flags);
    std::vector<std::size_t> ss = bench::default_dataset_sizes();
    if (!sizes.empty()) {
      ss.clear();
      for (double v : io::parse_double_list(sizes)) {
        if (v < 1 || v != static_cast<double>(static_cast<std::size_t>(v))) throw UsageError("sizes must be positive integers");
        ss.push_back(static_cast<std::size_t>(v));
      }
    }
    bench::cmd_sweep_dataset(c, single_tm(c, flags, 2400.0), ss, log);
  } else if (latent_probe->parsed()) {
    probe.values = io::parse_double_list(probe_values);
    bench::cmd_latent_probe(probe, log);
  } else if (compare->parsed()) {
    std::vector<std::filesystem::path> paths(reports.begin(), reports.end());
    bench::cmd_compare(paths, compare_options, compare_out, std::cout);
  } else if (inspect->parsed()) {
    bench::cmd_inspect(inspect_path, std::cout);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
