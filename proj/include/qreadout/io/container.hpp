#pragma once

// Shared on-disk layout of every QRD file:
//
//   QRD-<KIND> <version>
//   <key> <value>            (any number of text header lines)
//   payload_values <20-digit count>
//   checksum <16-hex FNV-1a 64 of the payload bytes>
//   end_header
//   <count little-endian IEEE-754 binary64 values>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace qreadout::io {

std::uint64_t fnv1a64(std::span<const unsigned char> bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);

class Header {
 public:
  void set(const std::string& key, const std::string& value);
  void set(const std::string& key, double value);
  void set(const std::string& key, std::uint64_t value);
  bool has(const std::string& key) const;
  /// Throws DataError when the key is missing.
  const std::string& get(const std::string& key) const;
  double get_double(const std::string& key) const;
  std::uint64_t get_u64(const std::string& key) const;

  const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

/// Shortest decimal text that round-trips exactly.
std::string format_double(double v);

struct Container {
  std::string kind;
  int version = 0;
  Header header;
  std::vector<double> payload;
  std::uint64_t checksum = 0;
};

/// Streams the payload so large datasets never sit in memory; the count and
/// checksum lines are patched in by finish().
class ContainerWriter {
 public:
  ContainerWriter(const std::filesystem::path& path, const std::string& kind, int version,
                  const Header& header);
  ~ContainerWriter();
  ContainerWriter(const ContainerWriter&) = delete;
  ContainerWriter& operator=(const ContainerWriter&) = delete;

  void append(std::span<const double> values);
  void append(double value) { append(std::span<const double>(&value, 1)); }
  /// Returns the payload checksum.
  std::uint64_t finish();

 private:
  std::ofstream out_;
  std::filesystem::path path_;
  std::streampos count_pos_;
  std::streampos checksum_pos_;
  std::uint64_t count_ = 0;
  std::uint64_t hash_;
  bool finished_ = false;
};

void write_container(const std::filesystem::path& path, const std::string& kind, int version,
                     const Header& header, std::span<const double> payload);

/// Reads and verifies a whole container. Distinct exceptions: DataError for a
/// wrong kind or malformed header, VersionMismatch, TruncatedFile,
/// ChecksumMismatch.
Container read_container(const std::filesystem::path& path, const std::string& expected_kind,
                         int expected_version);

/// Header only plus streaming checksum verification; for `inspect`.
Container read_container_header(const std::filesystem::path& path, bool verify_payload);

}  // namespace qreadout::io
