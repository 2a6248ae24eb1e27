#include <doctest.h>

#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "qreadout/bench/commands.hpp"
#include "qreadout/bench/experiment.hpp"
#include "qreadout/bench/report.hpp"
#include "qreadout/errors.hpp"
#include "qreadout/io/config_file.hpp"
#include "qreadout/io/qrd.hpp"

using namespace qreadout;
using namespace qreadout::bench;
namespace fs = std::filesystem;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig c;
  c.tm_list_ns = {800, 1600};
  c.repeats = 2;
  c.shots_per_state = 60;
  c.training.train.max_epochs = 20;
  return c;
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

double diff_of(const std::string& csv, const std::string& kind) {
  for (const auto& l : lines(csv)) {
    if (l.rfind(kind + ",", 0) == 0) return std::stod(l.substr(l.rfind(',') + 1));
  }
  FAIL("missing row " << kind);
  return 0;
}

}  // namespace

TEST_SUITE("bench") {

TEST_CASE("method names") {
  CHECK(parse_methods("gmm,pretrann") == std::vector<Method>{Method::gmm, Method::pretrann});
  CHECK(to_string(Method::ffnn) == "ffnn");
  CHECK_THROWS_AS(parse_method("svm"), UsageError);
}

TEST_CASE("config validation, file keys and hashing") {
  ExperimentConfig c;
  CHECK_NOTHROW(c.validate());
  CHECK(c.tm_list_ns.size() == 10);
  c.tm_list_ns = {808};
  CHECK_THROWS_AS(c.validate(), UsageError);
  c = ExperimentConfig{};
  c.split_fraction = 1.0;
  CHECK_THROWS_AS(c.validate(), UsageError);

  ExperimentConfig a, b;
  b.threads = 8;
  b.out_dir = "elsewhere";
  CHECK(a.hash() == b.hash());
  CHECK(a.hash().size() == 16);
  b.sim.master_seed += 1;
  CHECK(a.hash() != b.hash());

  const auto file = io::ConfigFile::parse(
      "tm_list_ns = 800, 2400\nmethods = gmm\nrepeats = 3\nnoise_sigma = 4.5\nstates = 0,1,2\n"
      "decay_rate_1_to_0_per_ns = 1e-5\nlatent_fraction = 1/1.3\n");
  ExperimentConfig d;
  apply_config(file, d);
  CHECK(d.tm_list_ns == std::vector<double>{800, 2400});
  CHECK(d.methods == std::vector<Method>{Method::gmm});
  CHECK(d.repeats == 3);
  CHECK(d.sim.noise_sigma == 4.5);
  CHECK(d.states == std::vector<int>{0, 1, 2});
  CHECK(d.sim.decay_rate_per_ns[1][0] == 1e-5);
  CHECK(d.latent_fraction == clf::Fraction{10, 13});
  ExperimentConfig e;
  CHECK_THROWS_AS(apply_config(io::ConfigFile::parse("no_such_key = 1\n"), e), UsageError);
}

TEST_CASE("seed streams") {
  ExperimentConfig c;
  CHECK(split_seed_for(c, 800, 0) != split_seed_for(c, 800, 1));
  CHECK(split_seed_for(c, 800, 0) != split_seed_for(c, 1600, 0));
  CHECK(model_seed_for(c, 800, Method::gmm, 0) != model_seed_for(c, 800, Method::ffnn, 0));
  CHECK(data_seed_for(c, 0) == c.sim.master_seed);
  CHECK(data_seed_for(c, 3) == c.sim.master_seed);
  c.fresh_data = true;
  CHECK(data_seed_for(c, 0) != data_seed_for(c, 1));
}

TEST_CASE("prepared data dimensions") {
  ExperimentConfig c;
  const auto d = prepare_data(c, 2400, 10, c.sim.master_seed);
  CHECK(d.features.dim() == 300);
  CHECK(d.features.size() == 20);
  CHECK(d.iq.size() == 20);
  CHECK(d.smoothing_window == 50);
  CHECK_FALSE(d.smoothing_clamped);
  const auto short_run = prepare_data(c, 320, 4, c.sim.master_seed);
  CHECK(short_run.smoothing_clamped);
}

TEST_CASE("benchmark cardinality, summary and determinism") {
  const ExperimentConfig c = small_config();
  const auto rows = run_benchmark(c, nullptr);
  CHECK(rows.size() == c.tm_list_ns.size() * c.methods.size() * c.repeats);
  for (const auto& r : rows) {
    CHECK_FALSE(r.report.failed);
    CHECK(r.report.n_test == 30);
    CHECK(r.config_hash == c.hash());
    CHECK(r.report.global >= 0.0);
    CHECK(r.report.global <= 1.0);
  }
  // The split is shared across methods of one (T_m, repeat) cell.
  CHECK(rows[0].report.split_seed == split_seed_for(c, rows[0].report.tm_ns, rows[0].report.repeat));

  const auto summary = summarize(c, rows);
  CHECK(summary.size() == c.tm_list_ns.size() * c.methods.size());
  for (const auto& s : summary) CHECK(s.ok == c.repeats);

  const std::string csv = rows_csv(c, rows);
  const auto csv_lines = lines(csv);
  CHECK(csv_lines.size() == rows.size() + 1);
  CHECK(csv_lines[0].find("config_hash") != std::string::npos);
  CHECK(csv_lines[0].substr(csv_lines[0].size() - 21) == "classify_batch10000_s");

  ExperimentConfig threaded = c;
  threaded.threads = 3;
  CHECK(strip_timing(rows_csv(threaded, run_benchmark(threaded, nullptr))) == strip_timing(csv));
}

TEST_CASE("compare: identical reports and definitional differences") {
  ReportSummary r;
  r.name = "r";
  r.tm_list_ns = {800, 2400, 3200};
  r.global_mean["pretrann"] = {{800, 0.95}, {2400, 0.97}, {3200, 0.99}};
  r.global_mean["gmm"] = {{800, 0.90}, {2400, 0.97}, {3200, 0.98}};
  const std::string out = compare_csv({r}, {});
  const auto ls = lines(out);
  CHECK(ls[1].find("tm,r,800,") == 0);
  CHECK(std::stod(ls[1].substr(ls[1].rfind(',') + 1)) == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(diff_of(out, "mean_all") == doctest::Approx((5.0 + 0.0 + 1.0) / 3).epsilon(1e-12));
  CHECK(diff_of(out, "mean_medium_long") == doctest::Approx(0.5).epsilon(1e-12));

  CompareOptions across;
  across.across = true;
  const std::string same = compare_csv({r, r}, across);
  for (const auto& l : lines(same)) {
    if (l.rfind("tm,", 0) == 0 || l.rfind("mean_all", 0) == 0) CHECK(std::stod(l.substr(l.rfind(',') + 1)) == 0.0);
  }
  ReportSummary other = r;
  other.tm_list_ns = {800};
  CHECK_THROWS_AS(compare_csv({r, other}, {}), DataError);
}

TEST_CASE("report JSON round trip through compare") {
  const fs::path dir = fs::temp_directory_path() / "qreadout_bench_report";
  fs::remove_all(dir);
  ExperimentConfig c = small_config();
  c.methods = {Method::gmm, Method::ffnn};
  c.repeats = 1;
  c.out_dir = dir;
  std::ostringstream log;
  cmd_benchmark(c, log);
  const auto rep = read_report(dir / "benchmark_report.json");
  CHECK(rep.tm_list_ns == c.tm_list_ns);
  CHECK(rep.config_hash == c.hash());
  CompareOptions opt;
  opt.method_a = "ffnn";
  opt.method_b = "ffnn";
  CHECK(diff_of(compare_csv({rep}, opt), "mean_all") == 0.0);
  CHECK(fs::exists(dir / "benchmark_rows.csv"));
  CHECK(fs::exists(dir / "benchmark_summary.csv"));
  fs::remove_all(dir);
}

TEST_CASE("generate writes the expected files and is reproducible") {
  const fs::path dir = fs::temp_directory_path() / "qreadout_bench_generate";
  fs::remove_all(dir);
  ExperimentConfig c;
  c.tm_list_ns = {2400};
  c.shots_per_state = 20;
  c.out_dir = dir;
  std::ostringstream log;
  cmd_generate(c, log);
  const auto traj = io::read_traj(dir / "traj_tm2400.qrd");
  CHECK(traj.trajectories.size() == 40);
  CHECK(traj.meta.points_per_quadrature == 150);
  CHECK(traj.meta.dt_ns == 16);
  CHECK(traj.to_dataset().dim() == 300);
  const std::string first = read_text(dir / "traj_tm2400.qrd");
  cmd_generate(c, log);
  CHECK(read_text(dir / "traj_tm2400.qrd") == first);
  fs::remove_all(dir);
}

TEST_CASE("sweeps emit one row per setting") {
  ExperimentConfig c = small_config();
  c.repeats = 1;
  c.shots_per_state = 40;
  const std::vector<clf::Fraction> fractions{{1, 2}, {1, 4}};
  const auto lat = run_latent_sweep(c, 800, fractions, nullptr);
  REQUIRE(lat.size() == 2);
  CHECK(lat[1].latent_dim == 25);
  CHECK(lines(latent_sweep_csv(c, 800, lat)).size() == 3);
  CHECK(default_latent_fractions().size() == 7);
  CHECK(default_dataset_sizes().size() == 6);

  const std::vector<std::size_t> sizes{20, 40};
  const auto ds = run_dataset_sweep(c, 800, sizes, nullptr);
  REQUIRE(ds.size() == 2);
  CHECK(ds[0].ok == 1);
  CHECK(lines(dataset_sweep_csv(c, 800, ds)).size() == 3);
  CHECK_FALSE(ds[1].loss_curves.empty());
}

TEST_CASE("latent probe command emits references and one row per value") {
  const fs::path dir = fs::temp_directory_path() / "qreadout_bench_probe";
  fs::remove_all(dir);
  ExperimentConfig c = small_config();
  c.tm_list_ns = {800};
  c.methods = {Method::pretrann};
  c.repeats = 1;
  c.out_dir = dir;
  c.save_models_dir = dir / "models";
  std::ostringstream log;
  cmd_generate(c, log);
  cmd_benchmark(c, log);
  ProbeRequest req;
  req.model = dir / "models" / "model_pretrann_tm800.qrd";
  req.dataset = dir / "traj_tm800.qrd";
  req.shot = 3;
  req.component = 1;
  req.values = {-1, -0.5, 0, 0.5, 1};
  req.output = dir / "probe.csv";
  cmd_latent_probe(req, log);
  const auto ls = lines(read_text(req.output));
  // header + input + reference + 5 probe rows
  CHECK(ls.size() == 8);
  req.component = 1000;
  CHECK_THROWS_AS(cmd_latent_probe(req, log), UsageError);
  fs::remove_all(dir);
}

}
