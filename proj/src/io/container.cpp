#include "qreadout/io/container.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <iomanip>
#include <sstream>

#include "qreadout/errors.hpp"

namespace qreadout::io {

namespace {

constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;
constexpr const char* kEndHeader = "end_header";

std::uint64_t to_little_endian(std::uint64_t bits) {
  if constexpr (std::endian::native == std::endian::little) {
    return bits;
  } else {
    std::uint64_t out = 0;
    for (int b = 0; b < 8; ++b) out |= ((bits >> (8 * b)) & 0xffULL) << (8 * (7 - b));
    return out;
  }
}

void encode(std::span<const double> values, std::vector<unsigned char>& bytes) {
  bytes.resize(values.size() * 8);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const std::uint64_t le = to_little_endian(std::bit_cast<std::uint64_t>(values[i]));
    std::memcpy(bytes.data() + 8 * i, &le, 8);
  }
}

double decode_one(const unsigned char* p) {
  std::uint64_t le = 0;
  std::memcpy(&le, p, 8);
  return std::bit_cast<double>(to_little_endian(le));
}

std::string padded_count(std::uint64_t n) {
  std::ostringstream s;
  s << std::setw(20) << std::setfill('0') << n;
  return s.str();
}

std::string hex16(std::uint64_t n) {
  std::ostringstream s;
  s << std::hex << std::setw(16) << std::setfill('0') << n;
  return s.str();
}

struct ParsedHeader {
  Container meta;
  std::uint64_t count = 0;
  std::uint64_t declared_checksum = 0;
};

ParsedHeader parse_header(std::istream& in, const std::filesystem::path& path) {
  ParsedHeader parsed;
  std::string line;
  if (!std::getline(in, line)) throw TruncatedFile(path.string() + ": empty file");
  {
    std::istringstream first(line);
    std::string magic;
    first >> magic >> parsed.meta.version;
    if (magic.rfind("QRD-", 0) != 0 || first.fail()) {
      throw DataError(path.string() + ": not a QRD file");
    }
    parsed.meta.kind = magic.substr(4);
  }
  bool have_count = false;
  bool have_checksum = false;
  bool ended = false;
  while (std::getline(in, line)) {
    if (line == kEndHeader) {
      ended = true;
      break;
    }
    const auto space = line.find(' ');
    const std::string key = line.substr(0, space);
    const std::string value = space == std::string::npos ? "" : line.substr(space + 1);
    if (key == "payload_values") {
      parsed.count = std::stoull(value);
      have_count = true;
    } else if (key == "checksum") {
      parsed.declared_checksum = std::stoull(value, nullptr, 16);
      have_checksum = true;
    } else {
      parsed.meta.header.set(key, value);
    }
  }
  if (!ended) throw TruncatedFile(path.string() + ": header is truncated (no end_header)");
  if (!have_count || !have_checksum) {
    throw DataError(path.string() + ": header lacks payload_values or checksum");
  }
  return parsed;
}

void check_kind(const Container& c, const std::filesystem::path& path,
                const std::string& expected_kind, int expected_version) {
  if (c.kind != expected_kind) {
    throw DataError(path.string() + ": expected a QRD-" + expected_kind + " file, found QRD-" + c.kind);
  }
  if (c.version != expected_version) {
    throw VersionMismatch(path.string() + ": QRD-" + c.kind + " version " +
                          std::to_string(c.version) + " is not supported (expected " +
                          std::to_string(expected_version) + ")");
  }
}

// Reads the payload in chunks, hashing as it goes; fills `out` when non-null.
std::uint64_t read_payload(std::istream& in, const ParsedHeader& parsed,
                           const std::filesystem::path& path, std::vector<double>* out) {
  constexpr std::size_t kChunk = 1 << 16;
  std::vector<unsigned char> buffer(kChunk * 8);
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  std::uint64_t remaining = parsed.count;
  if (out) out->reserve(parsed.count);
  while (remaining > 0) {
    const std::size_t take = static_cast<std::size_t>(std::min<std::uint64_t>(remaining, kChunk));
    in.read(reinterpret_cast<char*>(buffer.data()), static_cast<std::streamsize>(take * 8));
    if (static_cast<std::size_t>(in.gcount()) != take * 8) {
      throw TruncatedFile(path.string() + ": payload is truncated (" +
                          std::to_string(parsed.count - remaining + in.gcount() / 8) + " of " +
                          std::to_string(parsed.count) + " values present)");
    }
    hash = fnv1a64(std::span<const unsigned char>(buffer.data(), take * 8), hash);
    if (out) {
      for (std::size_t i = 0; i < take; ++i) out->push_back(decode_one(buffer.data() + 8 * i));
    }
    remaining -= take;
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw DataError(path.string() + ": trailing bytes after the declared payload");
  }
  if (hash != parsed.declared_checksum) {
    throw ChecksumMismatch(path.string() + ": payload checksum " + hex16(hash) +
                           " does not match header " + hex16(parsed.declared_checksum));
  }
  return hash;
}

}  // namespace

std::uint64_t fnv1a64(std::span<const unsigned char> bytes, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (unsigned char b : bytes) {
    h ^= b;
    h *= kFnvPrime;
  }
  return h;
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void Header::set(const std::string& key, const std::string& value) {
  if (key.empty() || key.find_first_of(" \n") != std::string::npos || value.find('\n') != std::string::npos) {
    throw UsageError("invalid header entry '" + key + "'");
  }
  for (auto& [k, v] : entries_) {
    if (k == key) {
      v = value;
      return;
    }
  }
  entries_.emplace_back(key, value);
}

void Header::set(const std::string& key, double value) { set(key, format_double(value)); }
void Header::set(const std::string& key, std::uint64_t value) { set(key, std::to_string(value)); }

bool Header::has(const std::string& key) const {
  for (const auto& [k, v] : entries_) {
    if (k == key) return true;
  }
  return false;
}

const std::string& Header::get(const std::string& key) const {
  for (const auto& [k, v] : entries_) {
    if (k == key) return v;
  }
  throw DataError("header is missing '" + key + "'");
}

double Header::get_double(const std::string& key) const {
  const std::string& v = get(key);
  double out = 0.0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc{} || res.ptr != v.data() + v.size()) {
    throw DataError("header entry '" + key + "' is not a number: " + v);
  }
  return out;
}

std::uint64_t Header::get_u64(const std::string& key) const {
  const std::string& v = get(key);
  std::uint64_t out = 0;
  const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc{} || res.ptr != v.data() + v.size()) {
    throw DataError("header entry '" + key + "' is not an unsigned integer: " + v);
  }
  return out;
}

ContainerWriter::ContainerWriter(const std::filesystem::path& path, const std::string& kind,
                                 int version, const Header& header)
    : out_(path, std::ios::binary | std::ios::trunc), path_(path), hash_(0xcbf29ce484222325ULL) {
  if (!out_) throw DataError("cannot open " + path.string() + " for writing");
  out_ << "QRD-" << kind << ' ' << version << '\n';
  for (const auto& [k, v] : header.entries()) out_ << k << ' ' << v << '\n';
  out_ << "payload_values ";
  count_pos_ = out_.tellp();
  out_ << padded_count(0) << '\n' << "checksum ";
  checksum_pos_ = out_.tellp();
  out_ << hex16(0) << '\n' << kEndHeader << '\n';
}

ContainerWriter::~ContainerWriter() {
  if (!finished_) {
    try {
      finish();
    } catch (...) {
    }
  }
}

void ContainerWriter::append(std::span<const double> values) {
  if (finished_) throw UsageError("ContainerWriter: append after finish");
  std::vector<unsigned char> bytes;
  encode(values, bytes);
  hash_ = fnv1a64(bytes, hash_);
  out_.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  count_ += values.size();
}

std::uint64_t ContainerWriter::finish() {
  if (finished_) return hash_;
  finished_ = true;
  out_.seekp(count_pos_);
  out_ << padded_count(count_);
  out_.seekp(checksum_pos_);
  out_ << hex16(hash_);
  out_.flush();
  if (!out_) throw DataError("write failed: " + path_.string());
  out_.close();
  return hash_;
}

void write_container(const std::filesystem::path& path, const std::string& kind, int version,
                     const Header& header, std::span<const double> payload) {
  ContainerWriter writer(path, kind, version, header);
  writer.append(payload);
  writer.finish();
}

Container read_container(const std::filesystem::path& path, const std::string& expected_kind,
                         int expected_version) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  ParsedHeader parsed = parse_header(in, path);
  check_kind(parsed.meta, path, expected_kind, expected_version);
  parsed.meta.checksum = read_payload(in, parsed, path, &parsed.meta.payload);
  return std::move(parsed.meta);
}

Container read_container_header(const std::filesystem::path& path, bool verify_payload) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  ParsedHeader parsed = parse_header(in, path);
  parsed.meta.checksum = parsed.declared_checksum;
  if (verify_payload) read_payload(in, parsed, path, nullptr);
  parsed.meta.header.set("payload_values", parsed.count);
  return std::move(parsed.meta);
}

}  // namespace qreadout::io
