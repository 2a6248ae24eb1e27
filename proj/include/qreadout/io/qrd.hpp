#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qreadout/dataset.hpp"
#include "qreadout/demod.hpp"
#include "qreadout/io/container.hpp"
#include "qreadout/readout_sim.hpp"

namespace qreadout::io {

inline constexpr int kRawVersion = 1;
inline constexpr int kTrajVersion = 1;

/// Provenance shared by both dataset kinds.
struct DatasetMeta {
  double duration_ns = 0.0;
  double f_if_hz = 0.0;
  std::uint64_t records = 0;
  std::uint64_t master_seed = 0;
  std::string config_hash;
  std::vector<int> states;
};

struct RawMeta : DatasetMeta {
  double sample_rate_hz = 0.0;
  std::uint64_t samples_per_shot = 0;
};

struct TrajMeta : DatasetMeta {
  double dt_ns = 0.0;
  std::uint64_t points_per_quadrature = 0;
  std::uint64_t smoothing_window = 1;
  bool smoothing_clamped = false;
};

/// Record: prepared, actual, n_events, (time_ns, state) x n_events, samples.
class RawWriter {
 public:
  RawWriter(const std::filesystem::path& path, const RawMeta& meta);
  void write(const sim::RawShot& shot);
  /// Throws DataError if fewer records were written than declared.
  std::uint64_t finish();

 private:
  RawMeta meta_;
  ContainerWriter writer_;
  std::uint64_t written_ = 0;
};

/// Record: label, I x C, Q x C.
class TrajWriter {
 public:
  TrajWriter(const std::filesystem::path& path, const TrajMeta& meta);
  void write(const dsp::Trajectory& traj);
  std::uint64_t finish();

 private:
  TrajMeta meta_;
  ContainerWriter writer_;
  std::uint64_t written_ = 0;
};

struct RawFile {
  RawMeta meta;
  std::vector<sim::RawShot> shots;
};

struct TrajFile {
  TrajMeta meta;
  std::vector<dsp::Trajectory> trajectories;

  /// Flattened features, one column per record.
  dsp::LabeledDataset to_dataset() const;
};

RawFile read_raw(const std::filesystem::path& path);
TrajFile read_traj(const std::filesystem::path& path);

/// Labelled full-demodulation points as CSV: label,i,q.
void write_iq_csv(const std::filesystem::path& path, std::span<const dsp::IQPoint> points,
                  std::span<const int> labels);
void read_iq_csv(const std::filesystem::path& path, std::vector<dsp::IQPoint>& points,
                 std::vector<int>& labels);

}  // namespace qreadout::io
