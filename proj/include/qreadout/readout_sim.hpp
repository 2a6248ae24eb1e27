#pragma once

// Phenomenological dispersive-readout simulator.
//
// A shot is a raw heterodyne record r(t) = A(t) cos(2 pi f_if t + phi(t)) + n(t).
// The envelope (A, phi) starts at (0, transient_phase_rad) and relaxes
// exponentially with time constant ring_up_tau_ns toward the steady point of
// the current qubit state, re-targeting whenever the state decays. The noise
// n(t) is white Gaussian per raw sample.

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "qreadout/rng.hpp"

namespace qreadout::sim {

inline constexpr int kMaxStates = 3;

using StateMatrix = std::array<std::array<double, kMaxStates>, kMaxStates>;

struct SimConfig {
  double sample_rate_hz = 1.0e9;
  double f_if_hz = 62.5e6;
  /// Sliced-demodulation window; must span whole carrier periods.
  double slice_ns = 16.0;
  std::array<double, kMaxStates> amplitude{1.0, 1.0, 1.0};
  std::array<double, kMaxStates> phase_rad{-0.6, 0.6, 1.8};
  /// Envelope phase at the start of the measurement.
  double transient_phase_rad = 3.14159265358979323846;
  double ring_up_tau_ns = 400.0;
  double noise_sigma = 5.0;
  /// decay_rate_per_ns[from][to]; only downward entries are used.
  StateMatrix decay_rate_per_ns{};
  std::array<double, kMaxStates> prep_error_prob{0.0, 0.02, 0.02};
  /// prep_error_target[s] is the distribution of the state actually prepared
  /// when preparation of s fails.
  StateMatrix prep_error_target{};
  std::uint64_t master_seed = 20230611;

  /// Default calibration (see README for the regimes it reproduces).
  static SimConfig defaults();

  /// Throws UsageError on any violated invariant.
  void validate() const;

  double slice_periods() const { return slice_ns * 1e-9 * f_if_hz; }
  std::size_t samples_per_slice() const;
  std::size_t sample_count(double duration_ns) const;
  /// True if duration_ns is a positive whole number of slices.
  bool is_whole_slices(double duration_ns) const;
};

struct DecayEvent {
  double time_ns;
  int new_state;

  bool operator==(const DecayEvent&) const = default;
};

struct RawShot {
  std::vector<double> samples;
  int prepared_label = 0;
  int actual_initial_state = 0;
  std::vector<DecayEvent> decay_events;
  double duration_ns = 0.0;
  double sample_rate_hz = 1.0e9;
};

/// Competing exponential clocks over the downward transitions of the current
/// state. Returns the (possibly empty) ordered list of jumps before duration_ns.
std::vector<DecayEvent> sample_decay_path(const SimConfig& config, int initial_state,
                                          double duration_ns, Rng& rng);

/// One shot, deterministic in (config.master_seed, shot_seed).
/// Throws UsageError if duration_ns is not a whole number of slices or the
/// state is out of range.
RawShot simulate_shot(const SimConfig& config, int prepared_state, double duration_ns,
                      std::uint64_t shot_seed);

/// Seed of shot `index` of `state`, independent of generation order.
std::uint64_t shot_seed(std::uint64_t master_seed, int state, std::size_t index);

/// shots_per_state shots for each listed state, grouped by state in list
/// order. `threads` = 0 uses the hardware concurrency.
std::vector<RawShot> generate_dataset(const SimConfig& config, std::size_t shots_per_state,
                                      std::span<const int> states, double duration_ns,
                                      std::size_t threads = 0);

}  // namespace qreadout::sim
