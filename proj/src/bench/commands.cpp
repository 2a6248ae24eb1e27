#include "qreadout/bench/commands.hpp"

#include <cmath>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "qreadout/clf/autoencoder.hpp"
#include "qreadout/clf/model_io.hpp"
#include "qreadout/errors.hpp"
#include "qreadout/io/config_file.hpp"
#include "qreadout/io/qrd.hpp"
#include "qreadout/parallel.hpp"

namespace qreadout::bench {

namespace {

std::string tm_tag(double tm_ns) { return "tm" + std::to_string(std::llround(tm_ns)); }

void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw DataError("cannot create " + dir.string() + ": " + ec.message());
}

io::DatasetMeta common_meta(const ExperimentConfig& c, double tm, std::uint64_t records) {
  io::DatasetMeta m;
  m.duration_ns = tm;
  m.f_if_hz = c.sim.f_if_hz;
  m.records = records;
  m.master_seed = c.sim.master_seed;
  m.config_hash = c.hash();
  m.states = c.states;
  return m;
}

}  // namespace

std::vector<clf::Fraction> default_latent_fractions() {
  return {{1, 1}, {10, 13}, {1, 2}, {1, 4}, {1, 6}, {1, 8}, {1, 10}};
}

std::vector<std::size_t> default_dataset_sizes() { return {3000, 6000, 12000, 24000, 48000, 60000}; }

ExperimentConfig build_config(const CommonFlags& f) {
  ExperimentConfig c;
  if (f.config) apply_config(io::ConfigFile::load(*f.config), c);
  if (f.seed) c.sim.master_seed = *f.seed;
  if (f.out_dir) c.out_dir = *f.out_dir;
  if (f.tm) c.tm_list_ns = io::parse_double_list(*f.tm);
  if (f.methods) c.methods = parse_methods(*f.methods);
  if (f.repeats) c.repeats = *f.repeats;
  if (f.threads) c.threads = *f.threads;
  if (f.shots_per_state) c.shots_per_state = *f.shots_per_state;
  if (f.states) {
    c.states.clear();
    for (double s : io::parse_double_list(*f.states)) {
      if (s != std::floor(s)) throw UsageError("states must be integers");
      c.states.push_back(static_cast<int>(s));
    }
  }
  if (f.fresh_data) c.fresh_data = true;
  c.validate();
  return c;
}

void cmd_generate(const ExperimentConfig& config, std::ostream& log) {
  config.validate();
  ensure_dir(config.out_dir);
  const auto& sc = config.sim;
  const std::size_t n = config.shots_per_state * config.states.size();
  constexpr std::size_t kChunk = 256;
  for (double tm : config.tm_list_ns) {
    const std::size_t points = static_cast<std::size_t>(std::llround(tm / sc.slice_ns));
    io::RawMeta raw_meta;
    static_cast<io::DatasetMeta&>(raw_meta) = common_meta(config, tm, n);
    raw_meta.sample_rate_hz = sc.sample_rate_hz;
    raw_meta.samples_per_shot = sc.sample_count(tm);
    io::TrajMeta traj_meta;
    static_cast<io::DatasetMeta&>(traj_meta) = common_meta(config, tm, n);
    traj_meta.dt_ns = sc.slice_ns;
    traj_meta.points_per_quadrature = points;
    traj_meta.smoothing_window = std::min(config.smoothing_window, points);
    traj_meta.smoothing_clamped = config.smoothing_window >= points && config.smoothing_window > 1;

    const auto raw_path = config.out_dir / ("raw_" + tm_tag(tm) + ".qrd");
    const auto traj_path = config.out_dir / ("traj_" + tm_tag(tm) + ".qrd");
    io::RawWriter raw(raw_path, raw_meta);
    io::TrajWriter traj(traj_path, traj_meta);
    std::vector<dsp::IQPoint> iq(n);
    std::vector<int> labels(n);
    for (std::size_t start = 0; start < n; start += kChunk) {
      const std::size_t count = std::min(kChunk, n - start);
      std::vector<sim::RawShot> shots(count);
      std::vector<dsp::Trajectory> trajs(count);
      parallel_for(count, config.threads, [&](std::size_t k) {
        const std::size_t g = start + k;
        const int state = config.states[g / config.shots_per_state];
        shots[k] = sim::simulate_shot(sc, state, tm, sim::shot_seed(sc.master_seed, state, g % config.shots_per_state));
        iq[g] = dsp::full_demod(shots[k], sc.f_if_hz);
        labels[g] = state;
        trajs[k] = dsp::smooth(dsp::sliced_demod(shots[k], sc.f_if_hz, sc.slice_ns), config.smoothing_window);
        trajs[k].label = state;
      });
      for (std::size_t k = 0; k < count; ++k) {
        raw.write(shots[k]);
        traj.write(trajs[k]);
      }
    }
    const auto raw_sum = raw.finish();
    const auto traj_sum = traj.finish();
    io::write_iq_csv(config.out_dir / ("iq_" + tm_tag(tm) + ".csv"), iq, labels);
    log << "T_m " << tm << " ns: " << n << " shots -> " << raw_path.string() << " (checksum " << std::hex << raw_sum
        << "), " << traj_path.string() << " (checksum " << traj_sum << std::dec << "), feature dim " << 2 * points
        << (traj_meta.smoothing_clamped ? ", smoothing window clamped" : "") << "\n";
  }
}

void cmd_benchmark(const ExperimentConfig& config, std::ostream& log) {
  ensure_dir(config.out_dir);
  const auto rows = run_benchmark(config, &log);
  const auto summary = summarize(config, rows);
  write_text(config.out_dir / "benchmark_rows.csv", rows_csv(config, rows));
  write_text(config.out_dir / "benchmark_summary.csv", summary_csv(config, summary));
  write_text(config.out_dir / "benchmark_report.json", report_json(config, rows, summary).dump(2) + "\n");
  std::size_t failed = 0;
  for (const auto& r : rows) failed += r.report.failed ? 1 : 0;
  log << "wrote " << rows.size() << " rows (" << failed << " failed) to " << config.out_dir.string() << "\n";
  for (const auto& s : summary) {
    log << "  " << to_string(s.method) << " T_m " << s.tm_ns << " ns: " << s.global_mean << " +- " << s.global_std
        << " (" << s.ok << " ok)\n";
  }
  // Partial failures are reported in the tables; a run with no usable cell is an error.
  if (!rows.empty() && failed == rows.size()) throw NumericError("every benchmark cell failed");
}

void cmd_sweep_latent(const ExperimentConfig& config, double tm_ns, const std::vector<clf::Fraction>& fractions,
                      std::ostream& log) {
  ensure_dir(config.out_dir);
  const auto rows = run_latent_sweep(config, tm_ns, fractions, &log);
  write_text(config.out_dir / "sweep_latent.csv", latent_sweep_csv(config, tm_ns, rows));
  log << "wrote " << (config.out_dir / "sweep_latent.csv").string() << "\n";
}

void cmd_sweep_dataset(const ExperimentConfig& config, double tm_ns, const std::vector<std::size_t>& sizes,
                       std::ostream& log) {
  ensure_dir(config.out_dir);
  const auto rows = run_dataset_sweep(config, tm_ns, sizes, &log);
  write_text(config.out_dir / "sweep_dataset.csv", dataset_sweep_csv(config, tm_ns, rows));
  write_text(config.out_dir / "sweep_dataset_loss_curves.csv", loss_curves_csv(rows));
  log << "wrote " << (config.out_dir / "sweep_dataset.csv").string() << "\n";
}

void cmd_latent_probe(const ProbeRequest& req, std::ostream& log) {
  const clf::LoadedModel loaded = clf::load_model(req.model);
  const auto* model = std::get_if<clf::PreTraNNModel>(&loaded.model);
  if (!model) throw UsageError("latent-probe needs a PreTraNN model, got " + loaded.method());
  const io::TrajFile file = io::read_traj(req.dataset);
  if (req.shot >= file.trajectories.size()) {
    throw UsageError("shot " + std::to_string(req.shot) + " out of range (dataset has " +
                     std::to_string(file.trajectories.size()) + " records)");
  }
  const dsp::FeatureVector fv = dsp::flatten(file.trajectories[req.shot]);
  if (fv.values.size() != model->scaler.dim()) {
    throw DataError("dataset feature dimension " + std::to_string(fv.values.size()) + " does not match the model's " +
                    std::to_string(model->scaler.dim()));
  }
  const Eigen::VectorXd x =
      model->scaler.apply(Eigen::Map<const Eigen::VectorXd>(fv.values.data(), static_cast<Eigen::Index>(fv.values.size())));
  const clf::ProbeResult probe = clf::latent_probe(model->encoder, model->decoder, x, req.component, req.values);

  const std::size_t c = fv.values.size() / 2;
  std::ostringstream out;
  out << "row,probe_value,l2_from_reference";
  for (std::size_t k = 0; k < c; ++k) out << ",i_" << k;
  for (std::size_t k = 0; k < c; ++k) out << ",q_" << k;
  out << '\n';
  auto row = [&](const std::string& kind, const std::string& value, const Eigen::VectorXd& v) {
    out << kind << ',' << value << ',' << io::format_double((v - probe.reference).norm());
    for (Eigen::Index k = 0; k < v.size(); ++k) out << ',' << io::format_double(v[k]);
    out << '\n';
  };
  row("input", "", x);
  row("reference", io::format_double(probe.latent[static_cast<Eigen::Index>(req.component)]), probe.reference);
  for (std::size_t k = 0; k < probe.family.size(); ++k) row("probe", io::format_double(req.values[k]), probe.family[k]);
  if (!req.output.parent_path().empty()) ensure_dir(req.output.parent_path());
  write_text(req.output, out.str());
  log << "latent component " << req.component << " of shot " << req.shot << " (original value "
      << probe.latent[static_cast<Eigen::Index>(req.component)] << "): " << probe.family.size()
      << " probes written to " << req.output.string() << "\n";
}

void cmd_compare(const std::vector<std::filesystem::path>& reports, const CompareOptions& options,
                 const std::filesystem::path& output, std::ostream& log) {
  std::vector<ReportSummary> loaded;
  for (const auto& p : reports) loaded.push_back(read_report(p));
  const std::string csv = compare_csv(loaded, options);
  if (!output.parent_path().empty()) ensure_dir(output.parent_path());
  write_text(output, csv);
  log << csv;
}

void cmd_inspect(const std::filesystem::path& path, std::ostream& out) {
  const io::Container c = io::read_container_header(path, true);
  nlohmann::json j;
  j["file"] = path.string();
  j["kind"] = "QRD-" + c.kind;
  j["version"] = c.version;
  nlohmann::json h = nlohmann::json::object();
  for (const auto& [k, v] : c.header.entries()) {
    if (v.size() > 200) {
      h[k] = v.substr(0, 200) + "... (" + std::to_string(v.size()) + " chars)";
    } else {
      h[k] = v;
    }
  }
  j["header"] = h;
  std::ostringstream sum;
  sum << std::hex << c.checksum;
  j["checksum"] = sum.str();
  j["checksum_ok"] = true;
  if (c.kind == "RAW") {
    j["records_read"] = io::read_raw(path).shots.size();
  } else if (c.kind == "TRAJ") {
    j["records_read"] = io::read_traj(path).trajectories.size();
  } else if (c.kind == "MODEL") {
    j["method"] = clf::load_model(path).method();
  }
  out << j.dump(2) << "\n";
}

}  // namespace qreadout::bench
