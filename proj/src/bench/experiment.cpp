#include "qreadout/bench/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <sstream>

#include "qreadout/clf/gmm.hpp"
#include "qreadout/clf/model_io.hpp"
#include "qreadout/clf/pretrann.hpp"
#include "qreadout/errors.hpp"
#include "qreadout/io/container.hpp"
#include "qreadout/parallel.hpp"
#include "qreadout/rng.hpp"

namespace qreadout::bench {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::uint64_t tm_key(double tm_ns) { return static_cast<std::uint64_t>(std::llround(tm_ns)); }

std::string list_text(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += io::format_double(v[i]);
  }
  return out;
}

template <std::size_t N>
std::string list_text(const std::array<double, N>& v) {
  return list_text(std::vector<double>(v.begin(), v.end()));
}

template <std::size_t N>
std::array<double, N> to_array(const std::vector<double>& v, const std::string& key) {
  if (v.size() != N) {
    throw UsageError(key + ": expected " + std::to_string(N) + " comma-separated values");
  }
  std::array<double, N> out{};
  std::copy(v.begin(), v.end(), out.begin());
  return out;
}

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};

MeanStd mean_std(const std::vector<double>& v) {
  MeanStd out;
  if (v.empty()) return out;
  out.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - out.mean) * (x - out.mean);
    out.std = std::sqrt(ss / static_cast<double>(v.size() - 1));
  }
  return out;
}

std::vector<dsp::IQPoint> take_points(const std::vector<dsp::IQPoint>& pts, const std::vector<std::size_t>& idx) {
  std::vector<dsp::IQPoint> out;
  out.reserve(idx.size());
  for (auto i : idx) out.push_back(pts[i]);
  return out;
}

// Batch of `n` test samples, cycling through the test set.
std::vector<std::size_t> cycled(std::size_t available, std::size_t n) {
  std::vector<std::size_t> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = i % available;
  return out;
}

template <typename Model>
void time_network(const Model& model, const Eigen::MatrixXd& test, std::map<std::string, double>& timing) {
  const auto n = static_cast<std::size_t>(test.cols());
  const std::size_t singles = std::min<std::size_t>(100, n);
  auto t0 = Clock::now();
  int sink = 0;
  for (std::size_t i = 0; i < singles; ++i) sink += model.predict(test.col(static_cast<Eigen::Index>(i))).label;
  timing["classify_single_s"] = seconds_since(t0) / static_cast<double>(singles);
  for (std::size_t batch : {std::size_t{100}, std::size_t{10000}}) {
    const auto idx = cycled(n, batch);
    Eigen::MatrixXd x(test.rows(), static_cast<Eigen::Index>(batch));
    for (std::size_t j = 0; j < batch; ++j) x.col(static_cast<Eigen::Index>(j)) = test.col(static_cast<Eigen::Index>(idx[j]));
    t0 = Clock::now();
    sink += model.predict_batch(x).front();
    timing["classify_batch" + std::to_string(batch) + "_s"] = seconds_since(t0);
  }
  (void)sink;
}

void time_gmm(const clf::GmmModel& model, const std::vector<dsp::IQPoint>& test, std::map<std::string, double>& timing) {
  const std::size_t singles = std::min<std::size_t>(100, test.size());
  auto t0 = Clock::now();
  int sink = 0;
  for (std::size_t i = 0; i < singles; ++i) sink += clf::gmm_predict(model, test[i]);
  timing["classify_single_s"] = seconds_since(t0) / static_cast<double>(singles);
  for (std::size_t batch : {std::size_t{100}, std::size_t{10000}}) {
    const auto pts = take_points(test, cycled(test.size(), batch));
    t0 = Clock::now();
    sink += clf::gmm_predict_batch(model, pts).front();
    timing["classify_batch" + std::to_string(batch) + "_s"] = seconds_since(t0);
  }
  (void)sink;
}

// Scores predictions of prepared-state labels; the confusion matrix is
// indexed by position in config.states.
void score_states(metrics::EvalReport& r, const std::vector<int>& preds, const std::vector<int>& labels,
                  const std::vector<int>& states) {
  r.per_state = metrics::per_state_accuracy(preds, labels, states);
  r.global = metrics::global_accuracy(r.per_state);
  auto index_of = [&](int s) {
    const auto it = std::find(states.begin(), states.end(), s);
    if (it == states.end()) throw DataError("prediction " + std::to_string(s) + " is not a configured state");
    return static_cast<int>(it - states.begin());
  };
  std::vector<int> pi, li;
  for (int p : preds) pi.push_back(index_of(p));
  for (int l : labels) li.push_back(index_of(l));
  r.confusion = metrics::confusion_matrix(pi, li, states.size());
  r.n_test = labels.size();
}

template <typename Model>
void maybe_save(const ExperimentConfig& config, const metrics::EvalReport& r, double dt_ns, const Model& model) {
  if (config.save_models_dir.empty() || r.repeat != 0) return;
  std::filesystem::create_directories(config.save_models_dir);
  io::Header meta;
  meta.set("tm_ns", r.tm_ns);
  meta.set("dt_ns", dt_ns);
  meta.set("repeat", static_cast<std::uint64_t>(r.repeat));
  meta.set("model_seed", r.model_seed);
  meta.set("config_hash", config.hash());
  clf::save_model(config.save_models_dir / ("model_" + r.method + "_tm" + std::to_string(std::llround(r.tm_ns)) + ".qrd"),
                  model, meta);
}

clf::PreTraNNOptions pretrann_options(const ExperimentConfig& config) {
  clf::PreTraNNOptions o;
  o.settings = config.training;
  o.latent_fraction = config.latent_fraction;
  o.fine_tune = config.fine_tune;
  return o;
}

}  // namespace

std::string to_string(Method m) {
  switch (m) {
    case Method::gmm: return "gmm";
    case Method::ffnn: return "ffnn";
    case Method::pretrann: return "pretrann";
  }
  return "?";
}

Method parse_method(const std::string& name) {
  if (name == "gmm") return Method::gmm;
  if (name == "ffnn") return Method::ffnn;
  if (name == "pretrann") return Method::pretrann;
  throw UsageError("unknown method '" + name + "' (expected gmm, ffnn or pretrann)");
}

std::vector<Method> parse_methods(const std::string& comma_list) {
  std::vector<Method> out;
  for (const auto& s : io::split_list(comma_list)) {
    const Method m = parse_method(s);
    if (std::find(out.begin(), out.end(), m) == out.end()) out.push_back(m);
  }
  if (out.empty()) throw UsageError("no methods given");
  return out;
}

void ExperimentConfig::validate() const {
  sim.validate();
  if (tm_list_ns.empty()) throw UsageError("tm_list_ns is empty");
  for (double tm : tm_list_ns) {
    if (!sim.is_whole_slices(tm)) {
      throw UsageError("T_m = " + io::format_double(tm) + " ns is not a positive multiple of the " +
                       io::format_double(sim.slice_ns) + " ns slice");
    }
  }
  if (methods.empty()) throw UsageError("no methods selected");
  if (repeats < 1) throw UsageError("repeats must be >= 1");
  if (!(split_fraction > 0.0 && split_fraction < 1.0)) throw UsageError("split_fraction must lie in (0, 1)");
  if (shots_per_state < 2) throw UsageError("shots_per_state must be >= 2");
  if (states.size() < 2) throw UsageError("at least two states are required");
  for (std::size_t i = 0; i < states.size(); ++i) {
    if (states[i] < 0 || states[i] >= sim::kMaxStates) throw UsageError("states must lie in [0, 3)");
    for (std::size_t j = 0; j < i; ++j) {
      if (states[i] == states[j]) throw UsageError("duplicate state in states");
    }
  }
  if (smoothing_window < 1) throw UsageError("smoothing_window must be >= 1");
  if (training.train.batch_size < 1 || training.train.patience < 1 || training.train.max_epochs < 1) {
    throw UsageError("batch_size, patience and max_epochs must be >= 1");
  }
  if (!training.monitor_on_train && !(training.monitor_fraction > 0.0 && training.monitor_fraction < 1.0)) {
    throw UsageError("monitor_fraction must lie in (0, 1)");
  }
  clf::AutoencoderSpec{2, latent_fraction}.validate();
}

std::string ExperimentConfig::canonical_text() const {
  std::map<std::string, std::string> kv;
  kv["sample_rate_hz"] = io::format_double(sim.sample_rate_hz);
  kv["f_if_hz"] = io::format_double(sim.f_if_hz);
  kv["slice_ns"] = io::format_double(sim.slice_ns);
  kv["amplitude"] = list_text(sim.amplitude);
  kv["phase_rad"] = list_text(sim.phase_rad);
  kv["transient_phase_rad"] = io::format_double(sim.transient_phase_rad);
  kv["ring_up_tau_ns"] = io::format_double(sim.ring_up_tau_ns);
  kv["noise_sigma"] = io::format_double(sim.noise_sigma);
  kv["decay_rate_1_to_0_per_ns"] = io::format_double(sim.decay_rate_per_ns[1][0]);
  kv["decay_rate_2_to_1_per_ns"] = io::format_double(sim.decay_rate_per_ns[2][1]);
  kv["decay_rate_2_to_0_per_ns"] = io::format_double(sim.decay_rate_per_ns[2][0]);
  kv["prep_error_prob"] = list_text(sim.prep_error_prob);
  for (int s = 0; s < sim::kMaxStates; ++s) {
    kv["prep_error_target_" + std::to_string(s)] = list_text(sim.prep_error_target[static_cast<std::size_t>(s)]);
  }
  kv["master_seed"] = std::to_string(sim.master_seed);
  kv["tm_list_ns"] = list_text(tm_list_ns);
  std::string m;
  for (auto method : methods) m += (m.empty() ? "" : ",") + to_string(method);
  kv["methods"] = m;
  kv["repeats"] = std::to_string(repeats);
  kv["split_fraction"] = io::format_double(split_fraction);
  kv["shots_per_state"] = std::to_string(shots_per_state);
  std::string st;
  for (int s : states) st += (st.empty() ? "" : ",") + std::to_string(s);
  kv["states"] = st;
  kv["smoothing_window"] = std::to_string(smoothing_window);
  kv["latent_fraction"] = latent_fraction.to_string();
  kv["fine_tune"] = fine_tune ? "true" : "false";
  kv["fresh_data"] = fresh_data ? "true" : "false";
  kv["batch_size"] = std::to_string(training.train.batch_size);
  kv["patience"] = std::to_string(training.train.patience);
  kv["max_epochs"] = std::to_string(training.train.max_epochs);
  kv["learning_rate"] = io::format_double(training.train.adam.lr);
  kv["monitor_fraction"] = io::format_double(training.monitor_fraction);
  kv["monitor_on_train"] = training.monitor_on_train ? "true" : "false";
  std::string out;
  for (const auto& [k, v] : kv) out += k + " = " + v + "\n";
  return out;
}

std::string ExperimentConfig::hash() const {
  const std::string text = canonical_text();
  const std::uint64_t h = io::fnv1a64(std::span<const unsigned char>(
      reinterpret_cast<const unsigned char*>(text.data()), text.size()));
  std::ostringstream s;
  s << std::hex << std::setw(16) << std::setfill('0') << h;
  return s.str();
}

void apply_config(const io::ConfigFile& f, ExperimentConfig& c) {
  auto& s = c.sim;
  if (auto v = f.get_double("sample_rate_hz")) s.sample_rate_hz = *v;
  if (auto v = f.get_double("f_if_hz")) s.f_if_hz = *v;
  if (auto v = f.get_double("slice_ns")) s.slice_ns = *v;
  if (auto v = f.get_doubles("amplitude")) s.amplitude = to_array<sim::kMaxStates>(*v, "amplitude");
  if (auto v = f.get_doubles("phase_rad")) s.phase_rad = to_array<sim::kMaxStates>(*v, "phase_rad");
  if (auto v = f.get_double("transient_phase_rad")) s.transient_phase_rad = *v;
  if (auto v = f.get_double("ring_up_tau_ns")) s.ring_up_tau_ns = *v;
  if (auto v = f.get_double("noise_sigma")) s.noise_sigma = *v;
  if (auto v = f.get_double("decay_rate_1_to_0_per_ns")) s.decay_rate_per_ns[1][0] = *v;
  if (auto v = f.get_double("decay_rate_2_to_1_per_ns")) s.decay_rate_per_ns[2][1] = *v;
  if (auto v = f.get_double("decay_rate_2_to_0_per_ns")) s.decay_rate_per_ns[2][0] = *v;
  if (auto v = f.get_doubles("prep_error_prob")) s.prep_error_prob = to_array<sim::kMaxStates>(*v, "prep_error_prob");
  for (int st = 0; st < sim::kMaxStates; ++st) {
    const std::string key = "prep_error_target_" + std::to_string(st);
    if (auto v = f.get_doubles(key)) s.prep_error_target[static_cast<std::size_t>(st)] = to_array<sim::kMaxStates>(*v, key);
  }
  if (auto v = f.get_u64("master_seed")) s.master_seed = *v;
  if (auto v = f.get_doubles("tm_list_ns")) c.tm_list_ns = *v;
  if (auto v = f.get("methods")) c.methods = parse_methods(*v);
  if (auto v = f.get_u64("repeats")) c.repeats = *v;
  if (auto v = f.get_double("split_fraction")) c.split_fraction = *v;
  if (auto v = f.get_u64("shots_per_state")) c.shots_per_state = *v;
  if (auto v = f.get_doubles("states")) {
    c.states.clear();
    for (double x : *v) c.states.push_back(static_cast<int>(x));
  }
  if (auto v = f.get_u64("smoothing_window")) c.smoothing_window = *v;
  if (auto v = f.get("latent_fraction")) c.latent_fraction = clf::parse_fraction(*v);
  if (auto v = f.get_bool("fine_tune")) c.fine_tune = *v;
  if (auto v = f.get_bool("fresh_data")) c.fresh_data = *v;
  if (auto v = f.get_u64("batch_size")) c.training.train.batch_size = *v;
  if (auto v = f.get_u64("patience")) c.training.train.patience = *v;
  if (auto v = f.get_u64("max_epochs")) c.training.train.max_epochs = *v;
  if (auto v = f.get_double("learning_rate")) c.training.train.adam.lr = *v;
  if (auto v = f.get_double("monitor_fraction")) c.training.monitor_fraction = *v;
  if (auto v = f.get_bool("monitor_on_train")) c.training.monitor_on_train = *v;
  if (auto v = f.get_u64("threads")) c.threads = *v;
  if (auto v = f.get("out_dir")) c.out_dir = *v;
  f.reject_unused();
}

std::uint64_t data_seed_for(const ExperimentConfig& config, std::size_t repeat) {
  if (!config.fresh_data) return config.sim.master_seed;
  return derive_seed({config.sim.master_seed, tag(StreamTag::fresh_data), repeat});
}

std::uint64_t split_seed_for(const ExperimentConfig& config, double tm_ns, std::size_t repeat) {
  return derive_seed({config.sim.master_seed, tag(StreamTag::split), tm_key(tm_ns), repeat});
}

std::uint64_t model_seed_for(const ExperimentConfig& config, double tm_ns, Method method, std::size_t repeat) {
  return derive_seed({config.sim.master_seed, tag(StreamTag::model), tm_key(tm_ns),
                      static_cast<std::uint64_t>(method), repeat});
}

PreparedData prepare_data(const ExperimentConfig& config, double tm_ns, std::size_t shots_per_state,
                          std::uint64_t data_seed) {
  sim::SimConfig sc = config.sim;
  sc.master_seed = data_seed;
  sc.validate();
  if (!sc.is_whole_slices(tm_ns)) throw UsageError("T_m is not a whole number of slices");

  const std::size_t n = shots_per_state * config.states.size();
  const auto points = static_cast<std::size_t>(std::llround(tm_ns / sc.slice_ns));
  PreparedData out;
  out.tm_ns = tm_ns;
  out.data_seed = data_seed;
  out.smoothing_window = std::min(config.smoothing_window, points);
  out.smoothing_clamped = config.smoothing_window >= points && config.smoothing_window > 1;
  out.features.features.resize(static_cast<Eigen::Index>(2 * points), static_cast<Eigen::Index>(n));
  out.features.labels.resize(n);
  out.features.dt_ns = sc.slice_ns;
  out.features.duration_ns = tm_ns;
  out.iq.resize(n);

  parallel_for(n, config.threads, [&](std::size_t g) {
    const int state = config.states[g / shots_per_state];
    const std::size_t index = g % shots_per_state;
    const sim::RawShot shot = sim::simulate_shot(sc, state, tm_ns, sim::shot_seed(data_seed, state, index));
    out.iq[g] = dsp::full_demod(shot, sc.f_if_hz);
    const dsp::Trajectory traj = dsp::smooth(dsp::sliced_demod(shot, sc.f_if_hz, sc.slice_ns), config.smoothing_window);
    const Eigen::Index col = static_cast<Eigen::Index>(g);
    for (std::size_t k = 0; k < points; ++k) {
      out.features.features(static_cast<Eigen::Index>(k), col) = traj.i_series[k];
      out.features.features(static_cast<Eigen::Index>(points + k), col) = traj.q_series[k];
    }
    out.features.labels[g] = state;
  });
  return out;
}

metrics::EvalReport run_cell(const ExperimentConfig& config, const PreparedData& data, Method method,
                             std::size_t repeat, const dsp::Split& split) {
  metrics::EvalReport r;
  r.method = to_string(method);
  r.tm_ns = data.tm_ns;
  r.repeat = repeat;
  r.split_seed = split_seed_for(config, data.tm_ns, repeat);
  r.model_seed = model_seed_for(config, data.tm_ns, method, repeat);

  std::vector<int> test_labels;
  for (auto i : split.test) test_labels.push_back(data.features.labels[i]);
  std::vector<int> preds;

  if (method == Method::gmm) {
    const auto train_pts = take_points(data.iq, split.train);
    std::vector<int> train_labels;
    for (auto i : split.train) train_labels.push_back(data.features.labels[i]);
    const auto t0 = Clock::now();
    clf::GmmModel model = clf::gmm_fit(train_pts, config.states.size(), r.model_seed);
    model = clf::gmm_assign_labels(std::move(model), train_pts, train_labels);
    r.timing_s["train_s"] = seconds_since(t0);
    maybe_save(config, r, data.features.dt_ns, model);
    const auto test_pts = take_points(data.iq, split.test);
    preds = clf::gmm_predict_batch(model, test_pts);
    time_gmm(model, test_pts, r.timing_s);
  } else {
    const dsp::LabeledDataset train = data.features.subset(split.train);
    const dsp::LabeledDataset test = data.features.subset(split.test);
    const auto t0 = Clock::now();
    if (method == Method::ffnn) {
      const clf::FfnnModel model = clf::train_ffnn(train, config.training, r.model_seed);
      r.timing_s["train_s"] = seconds_since(t0);
      maybe_save(config, r, data.features.dt_ns, model);
      preds = model.predict_batch(test.features);
      time_network(model, test.features, r.timing_s);
    } else {
      const clf::PreTraNNModel model = clf::train_pretrann(train, pretrann_options(config), r.model_seed);
      r.timing_s["train_s"] = seconds_since(t0);
      maybe_save(config, r, data.features.dt_ns, model);
      preds = model.predict_batch(test.features);
      time_network(model, test.features, r.timing_s);
    }
  }
  score_states(r, preds, test_labels, config.states);
  return r;
}

std::vector<BenchmarkRow> run_benchmark(const ExperimentConfig& config, std::ostream* log) {
  config.validate();
  const std::string hash = config.hash();
  std::vector<BenchmarkRow> rows;
  for (double tm : config.tm_list_ns) {
    PreparedData shared;
    bool have_shared = false;
    for (std::size_t rep = 0; rep < config.repeats; ++rep) {
      PreparedData fresh;
      const PreparedData* data = nullptr;
      if (config.fresh_data) {
        fresh = prepare_data(config, tm, config.shots_per_state, data_seed_for(config, rep));
        data = &fresh;
      } else {
        if (!have_shared) {
          shared = prepare_data(config, tm, config.shots_per_state, data_seed_for(config, rep));
          have_shared = true;
          if (shared.smoothing_clamped && log) {
            *log << "warning: smoothing window " << config.smoothing_window << " clamped to "
                 << shared.smoothing_window << " points at T_m = " << tm << " ns\n";
          }
        }
        data = &shared;
      }
      const dsp::Split split = dsp::shuffle_split(data->features.size(), config.split_fraction,
                                                  split_seed_for(config, tm, rep));
      std::vector<BenchmarkRow> cells(config.methods.size());
      parallel_for(cells.size(), config.threads, [&](std::size_t m) {
        const Method method = config.methods[m];
        BenchmarkRow& row = cells[m];
        row.data_seed = data->data_seed;
        row.config_hash = hash;
        try {
          row.report = run_cell(config, *data, method, rep, split);
        } catch (const NumericError& e) {
          row.report.failed = true;
          row.report.failure = e.what();
        } catch (const DataError& e) {
          row.report.failed = true;
          row.report.failure = e.what();
        }
        if (row.report.failed) {
          row.report.method = to_string(method);
          row.report.tm_ns = tm;
          row.report.repeat = rep;
          row.report.split_seed = split_seed_for(config, tm, rep);
          row.report.model_seed = model_seed_for(config, tm, method, rep);
        }
      });
      for (auto& cell : cells) {
        if (log) {
          *log << "T_m " << tm << " ns, repeat " << rep + 1 << "/" << config.repeats << ", "
               << cell.report.method << ": ";
          if (cell.report.failed) {
            *log << "FAILED (" << cell.report.failure << "), excluded from the summary\n";
          } else {
            *log << "global " << std::fixed << std::setprecision(4) << cell.report.global << std::defaultfloat
                 << ", train " << std::setprecision(3) << cell.report.timing_s["train_s"] << " s\n"
                 << std::setprecision(6);
          }
        }
        rows.push_back(std::move(cell));
      }
    }
  }
  auto method_rank = [&](const std::string& m) {
    for (std::size_t i = 0; i < config.methods.size(); ++i) {
      if (to_string(config.methods[i]) == m) return i;
    }
    return config.methods.size();
  };
  std::stable_sort(rows.begin(), rows.end(), [&](const BenchmarkRow& a, const BenchmarkRow& b) {
    return method_rank(a.report.method) < method_rank(b.report.method);
  });
  return rows;
}

std::vector<SummaryRow> summarize(const ExperimentConfig& config, const std::vector<BenchmarkRow>& rows) {
  std::vector<SummaryRow> out;
  for (Method m : config.methods) {
    for (double tm : config.tm_list_ns) {
      SummaryRow s;
      s.method = m;
      s.tm_ns = tm;
      std::vector<double> global;
      std::map<int, std::vector<double>> per_state;
      std::map<std::string, std::vector<double>> timing;
      for (const auto& row : rows) {
        const auto& r = row.report;
        if (r.method != to_string(m) || r.tm_ns != tm) continue;
        if (r.failed) {
          ++s.failed;
          continue;
        }
        ++s.ok;
        global.push_back(r.global);
        for (const auto& [state, a] : r.per_state) per_state[state].push_back(a);
        for (const auto& [k, v] : r.timing_s) timing[k].push_back(v);
      }
      const MeanStd g = mean_std(global);
      s.global_mean = g.mean;
      s.global_std = g.std;
      for (int state : config.states) {
        const MeanStd ms = mean_std(per_state[state]);
        s.state_mean[state] = ms.mean;
        s.state_std[state] = ms.std;
      }
      for (const auto& [k, v] : timing) s.timing_mean[k] = mean_std(v).mean;
      out.push_back(std::move(s));
    }
  }
  return out;
}

std::vector<LatentSweepRow> run_latent_sweep(const ExperimentConfig& config, double tm_ns,
                                             const std::vector<clf::Fraction>& fractions, std::ostream* log) {
  config.validate();
  if (fractions.empty()) throw UsageError("no latent fractions given");
  const PreparedData data = prepare_data(config, tm_ns, config.shots_per_state, data_seed_for(config, 0));
  std::vector<LatentSweepRow> out;
  for (const auto& f : fractions) {
    LatentSweepRow row;
    row.fraction = f;
    const clf::AutoencoderSpec spec{data.features.dim(), f};
    spec.validate();
    row.latent_dim = spec.latent_dim();
    row.l1 = spec.l1();
    row.l2 = spec.l2();
    std::vector<double> acc, loss, ae_s, total_s;
    for (std::size_t rep = 0; rep < config.repeats; ++rep) {
      const PreparedData fresh = config.fresh_data
                                     ? prepare_data(config, tm_ns, config.shots_per_state, data_seed_for(config, rep))
                                     : PreparedData{};
      const PreparedData& d = config.fresh_data ? fresh : data;
      const dsp::Split split = dsp::shuffle_split(d.features.size(), config.split_fraction,
                                                  split_seed_for(config, tm_ns, rep));
      clf::PreTraNNOptions options = pretrann_options(config);
      options.latent_fraction = f;
      try {
        const auto t0 = Clock::now();
        const clf::PreTraNNModel model = clf::train_pretrann(
            d.features.subset(split.train), options, model_seed_for(config, tm_ns, Method::pretrann, rep));
        total_s.push_back(seconds_since(t0));
        const dsp::LabeledDataset test = d.features.subset(split.test);
        metrics::EvalReport r;
        score_states(r, model.predict_batch(test.features), test.labels, config.states);
        acc.push_back(r.global);
        loss.push_back(model.autoencoder_log.best_loss());
        ae_s.push_back(model.autoencoder_log.wall_time_s);
        ++row.ok;
        if (log) {
          *log << "latent " << f.to_string() << " (L_H " << row.latent_dim << "), repeat " << rep + 1 << "/"
               << config.repeats << ": global " << r.global << ", ae loss " << loss.back() << "\n";
        }
      } catch (const NumericError& e) {
        ++row.failed;
        if (log) *log << "warning: latent " << f.to_string() << " repeat " << rep + 1 << " failed: " << e.what() << "\n";
      }
    }
    const MeanStd a = mean_std(acc), l = mean_std(loss);
    row.accuracy_mean = a.mean;
    row.accuracy_std = a.std;
    row.loss_mean = l.mean;
    row.loss_std = l.std;
    row.ae_train_s_mean = mean_std(ae_s).mean;
    row.train_s_mean = mean_std(total_s).mean;
    out.push_back(row);
  }
  return out;
}

std::vector<DatasetSweepRow> run_dataset_sweep(const ExperimentConfig& config, double tm_ns,
                                               const std::vector<std::size_t>& sizes, std::ostream* log) {
  config.validate();
  if (sizes.empty()) throw UsageError("no dataset sizes given");
  const std::size_t n_states = config.states.size();
  for (auto s : sizes) {
    if (s < n_states) throw UsageError("dataset sizes must be at least the number of states");
  }
  const std::size_t largest = *std::max_element(sizes.begin(), sizes.end());
  // Enough shots that every repeat's training pool holds the largest size.
  const auto per_state = static_cast<std::size_t>(
      std::ceil(static_cast<double>(largest) / (config.split_fraction * static_cast<double>(n_states)))) + 1;

  std::vector<DatasetSweepRow> out(sizes.size());
  std::vector<std::vector<double>> acc(sizes.size()), secs(sizes.size());
  for (std::size_t i = 0; i < sizes.size(); ++i) out[i].size = sizes[i];

  PreparedData shared;
  if (!config.fresh_data) shared = prepare_data(config, tm_ns, per_state, data_seed_for(config, 0));
  for (std::size_t rep = 0; rep < config.repeats; ++rep) {
    const PreparedData fresh = config.fresh_data ? prepare_data(config, tm_ns, per_state, data_seed_for(config, rep))
                                                 : PreparedData{};
    const PreparedData& d = config.fresh_data ? fresh : shared;
    const dsp::Split split = dsp::shuffle_split(d.features.size(), config.split_fraction,
                                                split_seed_for(config, tm_ns, rep));
    const dsp::LabeledDataset test = d.features.subset(split.test);
    for (std::size_t i = 0; i < sizes.size(); ++i) {
      std::vector<std::size_t> pool = split.train;
      Rng rng(derive_seed({config.sim.master_seed, tag(StreamTag::subsample), sizes[i], rep}));
      shuffle(std::span<std::size_t>(pool), rng);
      pool.resize(sizes[i]);
      std::sort(pool.begin(), pool.end());
      try {
        const auto t0 = Clock::now();
        const clf::PreTraNNModel model = clf::train_pretrann(
            d.features.subset(pool), pretrann_options(config), model_seed_for(config, tm_ns, Method::pretrann, rep));
        secs[i].push_back(seconds_since(t0));
        metrics::EvalReport r;
        score_states(r, model.predict_batch(test.features), test.labels, config.states);
        acc[i].push_back(r.global);
        out[i].loss_curves["size" + std::to_string(sizes[i]) + "_r" + std::to_string(rep)] =
            model.autoencoder_log.epoch_loss;
        ++out[i].ok;
        if (log) {
          *log << "size " << sizes[i] << ", repeat " << rep + 1 << "/" << config.repeats << ": global " << r.global
               << ", train " << secs[i].back() << " s\n";
        }
      } catch (const NumericError& e) {
        ++out[i].failed;
        if (log) *log << "warning: size " << sizes[i] << " repeat " << rep + 1 << " failed: " << e.what() << "\n";
      }
    }
  }
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    const MeanStd a = mean_std(acc[i]), t = mean_std(secs[i]);
    out[i].accuracy_mean = a.mean;
    out[i].accuracy_std = a.std;
    out[i].train_s_mean = t.mean;
    out[i].train_s_std = t.std;
  }
  return out;
}

}  // namespace qreadout::bench
