#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "qreadout/demod.hpp"
#include "qreadout/errors.hpp"
#include "qreadout/io/config_file.hpp"
#include "qreadout/io/container.hpp"
#include "qreadout/io/qrd.hpp"
#include "qreadout/nn/serialize.hpp"
#include "qreadout/readout_sim.hpp"

using namespace qreadout;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void spit(const fs::path& p, const std::string& bytes) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << bytes;
}

}  // namespace

TEST_SUITE("io") {

TEST_CASE("FNV-1a reference vectors") {
  const std::string empty, a = "a", foobar = "foobar";
  auto h = [](const std::string& s) {
    return io::fnv1a64(std::span<const unsigned char>(reinterpret_cast<const unsigned char*>(s.data()), s.size()));
  };
  CHECK(h(empty) == 0xcbf29ce484222325ULL);
  CHECK(h(a) == 0xaf63dc4c8601ec8cULL);
  CHECK(h(foobar) == 0x85944171f73967e8ULL);
}

TEST_CASE("format_double round-trips") {
  for (double v : {0.1, 1.0 / 3, -2.5e-300, 6.02214076e23, 62.5e6}) {
    CHECK(std::stod(io::format_double(v)) == v);
  }
}

TEST_CASE("container round trip and diagnostics") {
  TempDir dir("qreadout_io_container");
  const fs::path p = dir.path / "c.qrd";
  io::Header h;
  h.set("alpha", 1.25);
  h.set("count", std::uint64_t{7});
  h.set("name", std::string("x"));
  const std::vector<double> payload{1.0, -2.0, 3.5, 1e-300};
  io::write_container(p, "TEST", 3, h, payload);

  const io::Container c = io::read_container(p, "TEST", 3);
  CHECK(c.payload == payload);
  CHECK(c.header.get_double("alpha") == 1.25);
  CHECK(c.header.get_u64("count") == 7);
  CHECK(c.header.get("name") == "x");

  CHECK_THROWS_AS(io::read_container(p, "TEST", 4), VersionMismatch);
  CHECK_THROWS_AS(io::read_container(p, "OTHER", 3), DataError);

  const std::string bytes = slurp(p);
  spit(dir.path / "trunc.qrd", bytes.substr(0, bytes.size() - 5));
  CHECK_THROWS_AS(io::read_container(dir.path / "trunc.qrd", "TEST", 3), TruncatedFile);
  spit(dir.path / "nohdr.qrd", bytes.substr(0, 30));
  CHECK_THROWS_AS(io::read_container(dir.path / "nohdr.qrd", "TEST", 3), TruncatedFile);

  std::string flipped = bytes;
  flipped[flipped.size() - 3] ^= 0x10;
  spit(dir.path / "flip.qrd", flipped);
  CHECK_THROWS_AS(io::read_container(dir.path / "flip.qrd", "TEST", 3), ChecksumMismatch);

  spit(dir.path / "extra.qrd", bytes + "x");
  CHECK_THROWS_AS(io::read_container(dir.path / "extra.qrd", "TEST", 3), DataError);
  CHECK_THROWS_AS(io::read_container(dir.path / "missing.qrd", "TEST", 3), DataError);
}

TEST_CASE("streaming writer matches the one-shot writer") {
  TempDir dir("qreadout_io_stream");
  io::Header h;
  h.set("k", std::string("v"));
  const std::vector<double> payload{4, 5, 6, 7};
  io::write_container(dir.path / "a.qrd", "S", 1, h, payload);
  {
    io::ContainerWriter w(dir.path / "b.qrd", "S", 1, h);
    w.append(std::span<const double>(payload.data(), 2));
    w.append(6.0);
    w.append(7.0);
    w.finish();
  }
  CHECK(slurp(dir.path / "a.qrd") == slurp(dir.path / "b.qrd"));
}

TEST_CASE("raw and trajectory datasets round trip") {
  TempDir dir("qreadout_io_qrd");
  const sim::SimConfig cfg = sim::SimConfig::defaults();
  const std::vector<int> states{0, 1};
  const auto shots = sim::generate_dataset(cfg, 5, states, 320, 1);

  io::RawMeta rm;
  rm.duration_ns = 320;
  rm.f_if_hz = cfg.f_if_hz;
  rm.records = shots.size();
  rm.master_seed = cfg.master_seed;
  rm.config_hash = "abc";
  rm.states = states;
  rm.sample_rate_hz = cfg.sample_rate_hz;
  rm.samples_per_shot = 320;
  {
    io::RawWriter w(dir.path / "raw.qrd", rm);
    for (const auto& s : shots) w.write(s);
    w.finish();
  }
  const io::RawFile raw = io::read_raw(dir.path / "raw.qrd");
  REQUIRE(raw.shots.size() == shots.size());
  for (std::size_t i = 0; i < shots.size(); ++i) {
    CHECK(raw.shots[i].samples == shots[i].samples);
    CHECK(raw.shots[i].prepared_label == shots[i].prepared_label);
    CHECK(raw.shots[i].actual_initial_state == shots[i].actual_initial_state);
    CHECK(raw.shots[i].decay_events == shots[i].decay_events);
  }
  CHECK(raw.meta.states == states);
  CHECK(raw.meta.config_hash == "abc");

  io::TrajMeta tm;
  static_cast<io::DatasetMeta&>(tm) = rm;
  tm.dt_ns = 16;
  tm.points_per_quadrature = 20;
  tm.smoothing_window = 5;
  std::vector<dsp::Trajectory> trajs;
  for (const auto& s : shots) trajs.push_back(dsp::smooth(dsp::sliced_demod(s, cfg.f_if_hz, 16), 5));
  {
    io::TrajWriter w(dir.path / "traj.qrd", tm);
    for (const auto& t : trajs) w.write(t);
    w.finish();
  }
  const io::TrajFile traj = io::read_traj(dir.path / "traj.qrd");
  REQUIRE(traj.trajectories.size() == trajs.size());
  for (std::size_t i = 0; i < trajs.size(); ++i) {
    CHECK(traj.trajectories[i].i_series == trajs[i].i_series);
    CHECK(traj.trajectories[i].q_series == trajs[i].q_series);
    CHECK(traj.trajectories[i].label == trajs[i].label);
  }
  CHECK(traj.meta.dt_ns == 16);
  const auto ds = traj.to_dataset();
  CHECK(ds.dim() == 40);
  CHECK(ds.size() == 10);

  // A writer that is finished early refuses to produce a short file.
  io::RawWriter short_writer(dir.path / "short.qrd", rm);
  short_writer.write(shots[0]);
  CHECK_THROWS(short_writer.finish());
}

TEST_CASE("IQ CSV round trip") {
  TempDir dir("qreadout_io_csv");
  const std::vector<dsp::IQPoint> pts{{0.1, -0.2}, {1.0 / 3, 2e-17}};
  const std::vector<int> labels{0, 2};
  io::write_iq_csv(dir.path / "iq.csv", pts, labels);
  std::vector<dsp::IQPoint> back;
  std::vector<int> back_labels;
  io::read_iq_csv(dir.path / "iq.csv", back, back_labels);
  CHECK(back_labels == labels);
  REQUIRE(back.size() == 2);
  CHECK(back[1].i == pts[1].i);
  CHECK(back[1].q == pts[1].q);
}

TEST_CASE("network file round trip") {
  TempDir dir("qreadout_io_net");
  Rng rng(1);
  const nn::DenseNetwork net = nn::DenseNetwork::glorot(
      {{3, 5, nn::Activation::sigmoid}, {5, 2, nn::Activation::softmax}}, rng);
  nn::save_network(dir.path / "n.qrd", net, 99);
  std::uint64_t seed = 0;
  CHECK(nn::load_network(dir.path / "n.qrd", &seed) == net);
  CHECK(seed == 99);
  CHECK(nn::decode_layers(nn::encode_layers(net)) == net.layers());
}

TEST_CASE("config files") {
  const auto cfg = io::ConfigFile::parse("# comment\nalpha = 1.5\nlist = 1, 2,3\nflag = true\nname = x # trailing\n");
  CHECK(cfg.get_double("alpha") == 1.5);
  CHECK(cfg.get_doubles("list") == std::vector<double>{1, 2, 3});
  CHECK(cfg.get_bool("flag") == true);
  CHECK(cfg.get("name") == "x");
  CHECK_FALSE(cfg.get("missing").has_value());
  CHECK_NOTHROW(cfg.reject_unused());

  const auto extra = io::ConfigFile::parse("a = 1\nb = 2\n");
  extra.get_double("a");
  CHECK(extra.unused() == std::vector<std::string>{"b"});
  CHECK_THROWS_AS(extra.reject_unused(), UsageError);
  CHECK_THROWS_AS(io::ConfigFile::parse("a = 1\na = 2\n"), UsageError);
  CHECK_THROWS_AS(io::ConfigFile::parse("no equals sign\n"), UsageError);
  CHECK_THROWS_AS(io::ConfigFile::parse("a = zz\n").get_double("a"), UsageError);
}

}
