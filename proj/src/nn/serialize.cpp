#include "qreadout/nn/serialize.hpp"

#include <sstream>

#include "qreadout/errors.hpp"

namespace qreadout::nn {

std::string encode_layers(const DenseNetwork& net) {
  std::string out;
  for (const auto& l : net.layers()) {
    if (!out.empty()) out += ',';
    out += std::to_string(l.in_dim) + ':' + std::to_string(l.out_dim) + ':' + to_string(l.activation);
  }
  return out;
}

std::vector<LayerSpec> decode_layers(const std::string& text) {
  std::vector<LayerSpec> layers;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    const auto a = item.find(':');
    const auto b = item.find(':', a == std::string::npos ? a : a + 1);
    if (a == std::string::npos || b == std::string::npos) {
      throw DataError("malformed layer spec '" + item + "'");
    }
    try {
      layers.push_back({std::stoul(item.substr(0, a)), std::stoul(item.substr(a + 1, b - a - 1)),
                        parse_activation(item.substr(b + 1))});
    } catch (const UsageError& e) {
      throw DataError(e.what());
    } catch (const std::logic_error&) {
      throw DataError("malformed layer spec '" + item + "'");
    }
  }
  if (layers.empty()) throw DataError("network has no layers");
  return layers;
}

std::uint64_t write_network(io::Header& header, const std::string& prefix, const DenseNetwork& net,
                            std::uint64_t offset) {
  header.set(prefix + ".layers", encode_layers(net));
  header.set(prefix + ".offset", offset);
  header.set(prefix + ".count", static_cast<std::uint64_t>(net.parameter_count()));
  return offset + net.parameter_count();
}

void append_network(io::ContainerWriter& writer, const DenseNetwork& net) {
  writer.append(net.flat_parameters());
}

DenseNetwork read_network(const io::Container& container, const std::string& prefix) {
  std::vector<LayerSpec> layers = decode_layers(container.header.get(prefix + ".layers"));
  DenseNetwork net;
  try {
    net = DenseNetwork(std::move(layers));
  } catch (const UsageError& e) {
    throw DataError(prefix + ": " + e.what());
  }
  const std::uint64_t offset = container.header.get_u64(prefix + ".offset");
  const std::uint64_t count = container.header.get_u64(prefix + ".count");
  if (count != net.parameter_count() || offset + count > container.payload.size()) {
    throw DataError(prefix + ": parameter block does not match its layer specs");
  }
  net.set_flat_parameters(std::span<const double>(container.payload).subspan(offset, count));
  return net;
}

void save_network(const std::filesystem::path& path, const DenseNetwork& net, std::uint64_t seed) {
  io::Header header;
  header.set("seed", seed);
  write_network(header, "net", net, 0);
  io::ContainerWriter writer(path, "NET", kNetworkFileVersion, header);
  append_network(writer, net);
  writer.finish();
}

DenseNetwork load_network(const std::filesystem::path& path, std::uint64_t* seed) {
  const io::Container c = io::read_container(path, "NET", kNetworkFileVersion);
  if (seed) *seed = c.header.get_u64("seed");
  return read_network(c, "net");
}

}  // namespace qreadout::nn
