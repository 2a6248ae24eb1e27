#include "qreadout/io/qrd.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "qreadout/errors.hpp"

namespace qreadout::io {

namespace {

std::string join_states(const std::vector<int>& states) {
  std::string out;
  for (std::size_t i = 0; i < states.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(states[i]);
  }
  return out;
}

std::vector<int> parse_states(const std::string& text) {
  std::vector<int> out;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      out.push_back(std::stoi(item));
    } catch (const std::logic_error&) {
      throw DataError("malformed state list '" + text + "'");
    }
  }
  return out;
}

std::string legend(const std::vector<int>& states) {
  std::string out;
  for (std::size_t i = 0; i < states.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(states[i]) + "=|" + std::to_string(states[i]) + ">";
  }
  return out;
}

void put_common(Header& h, const DatasetMeta& m) {
  h.set("duration_ns", m.duration_ns);
  h.set("f_if_hz", m.f_if_hz);
  h.set("records", m.records);
  h.set("master_seed", m.master_seed);
  h.set("config_hash", m.config_hash.empty() ? std::string("none") : m.config_hash);
  h.set("states", join_states(m.states));
  h.set("labels", legend(m.states));
}

void get_common(const Header& h, DatasetMeta& m) {
  m.duration_ns = h.get_double("duration_ns");
  m.f_if_hz = h.get_double("f_if_hz");
  m.records = h.get_u64("records");
  m.master_seed = h.get_u64("master_seed");
  m.config_hash = h.get("config_hash");
  m.states = parse_states(h.get("states"));
}

Header raw_header(const RawMeta& m) {
  Header h;
  put_common(h, m);
  h.set("sample_rate_hz", m.sample_rate_hz);
  h.set("samples_per_shot", m.samples_per_shot);
  return h;
}

Header traj_header(const TrajMeta& m) {
  Header h;
  put_common(h, m);
  h.set("dt_ns", m.dt_ns);
  h.set("points_per_quadrature", m.points_per_quadrature);
  h.set("smoothing_window", m.smoothing_window);
  h.set("smoothing_clamped", std::string(m.smoothing_clamped ? "1" : "0"));
  return h;
}

int as_index(double v, const char* what) {
  if (!(v >= 0.0 && v < 1e9) || v != std::floor(v)) throw DataError(std::string("invalid ") + what + " in record");
  return static_cast<int>(v);
}

void check_finished(std::uint64_t written, std::uint64_t declared) {
  if (written != declared) {
    throw DataError("wrote " + std::to_string(written) + " records but the header declares " +
                    std::to_string(declared));
  }
}

}  // namespace

RawWriter::RawWriter(const std::filesystem::path& path, const RawMeta& meta)
    : meta_(meta), writer_(path, "RAW", kRawVersion, raw_header(meta)) {}

void RawWriter::write(const sim::RawShot& shot) {
  if (shot.samples.size() != meta_.samples_per_shot) throw UsageError("shot length differs from header");
  if (written_ >= meta_.records) throw UsageError("more records than declared");
  std::vector<double> head{static_cast<double>(shot.prepared_label),
                           static_cast<double>(shot.actual_initial_state),
                           static_cast<double>(shot.decay_events.size())};
  for (const auto& e : shot.decay_events) {
    head.push_back(e.time_ns);
    head.push_back(static_cast<double>(e.new_state));
  }
  writer_.append(head);
  writer_.append(shot.samples);
  ++written_;
}

std::uint64_t RawWriter::finish() {
  check_finished(written_, meta_.records);
  return writer_.finish();
}

TrajWriter::TrajWriter(const std::filesystem::path& path, const TrajMeta& meta)
    : meta_(meta), writer_(path, "TRAJ", kTrajVersion, traj_header(meta)) {}

void TrajWriter::write(const dsp::Trajectory& traj) {
  if (traj.size() != meta_.points_per_quadrature) throw UsageError("trajectory length differs from header");
  if (!traj.label) throw UsageError("trajectory has no label");
  if (written_ >= meta_.records) throw UsageError("more records than declared");
  writer_.append(static_cast<double>(*traj.label));
  writer_.append(traj.i_series);
  writer_.append(traj.q_series);
  ++written_;
}

std::uint64_t TrajWriter::finish() {
  check_finished(written_, meta_.records);
  return writer_.finish();
}

RawFile read_raw(const std::filesystem::path& path) {
  const Container c = read_container(path, "RAW", kRawVersion);
  RawFile f;
  get_common(c.header, f.meta);
  f.meta.sample_rate_hz = c.header.get_double("sample_rate_hz");
  f.meta.samples_per_shot = c.header.get_u64("samples_per_shot");
  const std::vector<double>& p = c.payload;
  std::size_t pos = 0;
  auto need = [&](std::size_t n) {
    if (pos + n > p.size()) throw DataError(path.string() + ": record runs past the payload");
  };
  for (std::uint64_t r = 0; r < f.meta.records; ++r) {
    need(3);
    sim::RawShot shot;
    shot.prepared_label = as_index(p[pos], "prepared label");
    shot.actual_initial_state = as_index(p[pos + 1], "initial state");
    const int events = as_index(p[pos + 2], "event count");
    pos += 3;
    need(2 * static_cast<std::size_t>(events) + f.meta.samples_per_shot);
    for (int e = 0; e < events; ++e) {
      shot.decay_events.push_back({p[pos], as_index(p[pos + 1], "decay state")});
      pos += 2;
    }
    shot.samples.assign(p.begin() + static_cast<std::ptrdiff_t>(pos),
                        p.begin() + static_cast<std::ptrdiff_t>(pos + f.meta.samples_per_shot));
    pos += f.meta.samples_per_shot;
    shot.duration_ns = f.meta.duration_ns;
    shot.sample_rate_hz = f.meta.sample_rate_hz;
    f.shots.push_back(std::move(shot));
  }
  if (pos != p.size()) throw DataError(path.string() + ": payload longer than the declared records");
  return f;
}

TrajFile read_traj(const std::filesystem::path& path) {
  const Container c = read_container(path, "TRAJ", kTrajVersion);
  TrajFile f;
  get_common(c.header, f.meta);
  f.meta.dt_ns = c.header.get_double("dt_ns");
  f.meta.points_per_quadrature = c.header.get_u64("points_per_quadrature");
  f.meta.smoothing_window = c.header.get_u64("smoothing_window");
  f.meta.smoothing_clamped = c.header.get("smoothing_clamped") == "1";
  const std::size_t cpts = f.meta.points_per_quadrature;
  const std::size_t stride = 1 + 2 * cpts;
  if (c.payload.size() != stride * f.meta.records) {
    throw DataError(path.string() + ": payload size does not match records x (1 + 2C)");
  }
  f.trajectories.reserve(f.meta.records);
  for (std::uint64_t r = 0; r < f.meta.records; ++r) {
    const double* rec = c.payload.data() + r * stride;
    dsp::Trajectory t;
    t.label = as_index(rec[0], "label");
    t.i_series.assign(rec + 1, rec + 1 + cpts);
    t.q_series.assign(rec + 1 + cpts, rec + 1 + 2 * cpts);
    t.dt_ns = f.meta.dt_ns;
    t.smoothing_window = f.meta.smoothing_window;
    t.smoothing_clamped = f.meta.smoothing_clamped;
    f.trajectories.push_back(std::move(t));
  }
  return f;
}

dsp::LabeledDataset TrajFile::to_dataset() const {
  std::vector<dsp::FeatureVector> fvs;
  fvs.reserve(trajectories.size());
  for (const auto& t : trajectories) fvs.push_back(dsp::flatten(t));
  dsp::LabeledDataset ds = dsp::LabeledDataset::from_features(fvs);
  ds.dt_ns = meta.dt_ns;
  ds.duration_ns = meta.duration_ns;
  return ds;
}

void write_iq_csv(const std::filesystem::path& path, std::span<const dsp::IQPoint> points,
                  std::span<const int> labels) {
  if (points.size() != labels.size()) throw UsageError("points and labels differ in length");
  std::ofstream out(path);
  if (!out) throw DataError("cannot open " + path.string() + " for writing");
  out << "label,i,q\n";
  for (std::size_t k = 0; k < points.size(); ++k) {
    out << labels[k] << ',' << format_double(points[k].i) << ',' << format_double(points[k].q) << '\n';
  }
  if (!out) throw DataError("write failed: " + path.string());
}

void read_iq_csv(const std::filesystem::path& path, std::vector<dsp::IQPoint>& points, std::vector<int>& labels) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != "label,i,q") throw DataError(path.string() + ": missing label,i,q header");
  points.clear();
  labels.clear();
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string a, b, c;
    if (!std::getline(row, a, ',') || !std::getline(row, b, ',') || !std::getline(row, c)) {
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": expected three fields");
    }
    Header h;
    h.set("i", b);
    h.set("q", c);
    try {
      labels.push_back(std::stoi(a));
    } catch (const std::logic_error&) {
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": bad label");
    }
    points.push_back({h.get_double("i"), h.get_double("q")});
  }
}

}  // namespace qreadout::io
