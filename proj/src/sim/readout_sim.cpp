#include "qreadout/readout_sim.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "qreadout/errors.hpp"
#include "qreadout/parallel.hpp"

namespace qreadout::sim {

namespace {

constexpr double kIntegerTolerance = 1e-6;

bool near_integer(double x) { return std::abs(x - std::round(x)) < kIntegerTolerance; }

void require(bool ok, const std::string& what) {
  if (!ok) throw UsageError("SimConfig: " + what);
}

void check_state(int state) {
  if (state < 0 || state >= kMaxStates) {
    throw UsageError("state index out of range: " + std::to_string(state));
  }
}

}  // namespace

SimConfig SimConfig::defaults() {
  SimConfig c;
  c.decay_rate_per_ns[1][0] = 1.0 / 30000.0;
  c.decay_rate_per_ns[2][1] = 1.0 / 30000.0;
  c.decay_rate_per_ns[2][0] = 1.0 / 60000.0;
  c.prep_error_target[0] = {0.0, 1.0, 0.0};
  c.prep_error_target[1] = {1.0, 0.0, 0.0};
  c.prep_error_target[2] = {0.5, 0.5, 0.0};
  return c;
}

void SimConfig::validate() const {
  require(sample_rate_hz > 0.0 && std::isfinite(sample_rate_hz), "sample_rate_hz must be > 0");
  require(f_if_hz > 0.0 && std::isfinite(f_if_hz), "f_if_hz must be > 0");
  require(ring_up_tau_ns > 0.0, "ring_up_tau_ns must be > 0");
  require(noise_sigma >= 0.0 && std::isfinite(noise_sigma), "noise_sigma must be >= 0");
  require(slice_ns > 0.0, "slice_ns must be > 0");
  require(slice_periods() >= 1.0 - kIntegerTolerance && near_integer(slice_periods()),
          "slice_ns * f_if_hz must be a whole number of carrier periods");
  require(near_integer(slice_ns * sample_rate_hz * 1e-9),
          "slice_ns must contain a whole number of raw samples");
  for (int s = 0; s < kMaxStates; ++s) {
    require(std::isfinite(amplitude[s]) && std::isfinite(phase_rad[s]),
            "amplitude and phase must be finite");
    require(prep_error_prob[s] >= 0.0 && prep_error_prob[s] <= 1.0,
            "prep_error_prob must lie in [0, 1]");
    double total = 0.0;
    for (int t = 0; t < kMaxStates; ++t) {
      require(decay_rate_per_ns[s][t] >= 0.0, "decay rates must be >= 0");
      require(prep_error_target[s][t] >= 0.0 && prep_error_target[s][t] <= 1.0,
              "prep_error_target entries must lie in [0, 1]");
      total += prep_error_target[s][t];
    }
    require(std::abs(total - 1.0) < 1e-9, "prep_error_target rows must sum to 1");
  }
}

std::size_t SimConfig::samples_per_slice() const {
  return static_cast<std::size_t>(std::llround(slice_ns * sample_rate_hz * 1e-9));
}

std::size_t SimConfig::sample_count(double duration_ns) const {
  return static_cast<std::size_t>(std::llround(duration_ns * sample_rate_hz / 1e9));
}

bool SimConfig::is_whole_slices(double duration_ns) const {
  if (!(duration_ns > 0.0)) return false;
  const double slices = duration_ns / slice_ns;
  return slices >= 1.0 - kIntegerTolerance && near_integer(slices);
}

std::vector<DecayEvent> sample_decay_path(const SimConfig& config, int initial_state,
                                          double duration_ns, Rng& rng) {
  check_state(initial_state);
  std::vector<DecayEvent> events;
  int state = initial_state;
  double now = 0.0;
  while (state > 0) {
    double earliest = std::numeric_limits<double>::infinity();
    int target = -1;
    for (int to = 0; to < state; ++to) {
      const double rate = config.decay_rate_per_ns[state][to];
      if (rate <= 0.0) continue;
      const double t = rng.exponential(rate);
      if (t < earliest) {
        earliest = t;
        target = to;
      }
    }
    if (target < 0 || now + earliest >= duration_ns) break;
    double when = now + earliest;
    if (when <= now) when = std::nextafter(now, duration_ns);
    events.push_back({when, target});
    now = when;
    state = target;
  }
  return events;
}

std::uint64_t shot_seed(std::uint64_t master_seed, int state, std::size_t index) {
  return derive_seed({master_seed, tag(StreamTag::shot), static_cast<std::uint64_t>(state),
                      static_cast<std::uint64_t>(index)});
}

RawShot simulate_shot(const SimConfig& config, int prepared_state, double duration_ns,
                      std::uint64_t seed) {
  check_state(prepared_state);
  if (!config.is_whole_slices(duration_ns)) {
    std::ostringstream msg;
    msg << "duration " << duration_ns << " ns is not a whole number of " << config.slice_ns
        << " ns slices";
    throw UsageError(msg.str());
  }

  Rng rng(derive_seed({config.master_seed, seed}));
  RawShot shot;
  shot.prepared_label = prepared_state;
  shot.duration_ns = duration_ns;
  shot.sample_rate_hz = config.sample_rate_hz;

  int initial = prepared_state;
  if (rng.uniform() < config.prep_error_prob[prepared_state]) {
    const double u = rng.uniform();
    double cumulative = 0.0;
    for (int s = 0; s < kMaxStates; ++s) {
      cumulative += config.prep_error_target[prepared_state][s];
      if (u < cumulative) {
        initial = s;
        break;
      }
    }
  }
  shot.actual_initial_state = initial;
  shot.decay_events = sample_decay_path(config, initial, duration_ns, rng);

  const std::size_t n = config.sample_count(duration_ns);
  shot.samples.resize(n);
  const double step_ns = 1e9 / config.sample_rate_hz;
  const double omega = 2.0 * std::numbers::pi * config.f_if_hz;
  const double tau = config.ring_up_tau_ns;

  // Envelope segment: relax from (amp0, phase0) at t0 toward the state's steady point.
  int state = initial;
  double t0 = 0.0;
  double amp0 = 0.0;
  double phase0 = config.transient_phase_rad;
  std::size_t next_event = 0;

  for (std::size_t k = 0; k < n; ++k) {
    const double t_ns = (static_cast<double>(k) + 0.5) * step_ns;
    while (next_event < shot.decay_events.size() &&
           shot.decay_events[next_event].time_ns <= t_ns) {
      const DecayEvent& ev = shot.decay_events[next_event];
      const double relax = std::exp(-(ev.time_ns - t0) / tau);
      amp0 = config.amplitude[state] + (amp0 - config.amplitude[state]) * relax;
      phase0 = config.phase_rad[state] + (phase0 - config.phase_rad[state]) * relax;
      t0 = ev.time_ns;
      state = ev.new_state;
      ++next_event;
    }
    const double relax = std::exp(-(t_ns - t0) / tau);
    const double amp = config.amplitude[state] + (amp0 - config.amplitude[state]) * relax;
    const double phase = config.phase_rad[state] + (phase0 - config.phase_rad[state]) * relax;
    const double t_s = (static_cast<double>(k) + 0.5) / config.sample_rate_hz;
    double value = amp * std::cos(omega * t_s + phase);
    if (config.noise_sigma > 0.0) value += config.noise_sigma * rng.normal();
    shot.samples[k] = value;
  }
  return shot;
}

std::vector<RawShot> generate_dataset(const SimConfig& config, std::size_t shots_per_state,
                                      std::span<const int> states, double duration_ns,
                                      std::size_t threads) {
  if (shots_per_state == 0) throw UsageError("shots_per_state must be > 0");
  for (int s : states) check_state(s);
  config.validate();
  std::vector<RawShot> shots(shots_per_state * states.size());
  parallel_for(shots.size(), threads, [&](std::size_t i) {
    const int state = states[i / shots_per_state];
    const std::size_t index = i % shots_per_state;
    shots[i] = simulate_shot(config, state, duration_ns, shot_seed(config.master_seed, state, index));
  });
  return shots;
}

}  // namespace qreadout::sim
