#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "qreadout/io/container.hpp"
#include "qreadout/nn/network.hpp"

namespace qreadout::nn {

/// "in:out:activation" per layer, comma separated.
std::string encode_layers(const DenseNetwork& net);
std::vector<LayerSpec> decode_layers(const std::string& text);

/// Records the layer specs and payload slice of `net` under `prefix`, and
/// appends its parameters (row-major W then b, per layer) to `writer`.
/// `offset` is the payload position where the block starts; returns the
/// position after it.
std::uint64_t write_network(io::Header& header, const std::string& prefix, const DenseNetwork& net,
                            std::uint64_t offset);
void append_network(io::ContainerWriter& writer, const DenseNetwork& net);

/// Rebuilds the network stored under `prefix`.
DenseNetwork read_network(const io::Container& container, const std::string& prefix);

/// Standalone single-network file (QRD-NET).
inline constexpr int kNetworkFileVersion = 1;
void save_network(const std::filesystem::path& path, const DenseNetwork& net, std::uint64_t seed);
DenseNetwork load_network(const std::filesystem::path& path, std::uint64_t* seed = nullptr);

}  // namespace qreadout::nn
