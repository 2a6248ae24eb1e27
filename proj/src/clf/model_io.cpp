#include "qreadout/clf/model_io.hpp"

#include <sstream>

#include "qreadout/errors.hpp"
#include "qreadout/nn/serialize.hpp"

namespace qreadout::clf {

namespace {

std::string join(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += io::format_double(v[i]);
  }
  return out;
}

std::string join(const std::vector<int>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(v[i]);
  }
  return out;
}

std::vector<double> split_doubles(const std::string& text) {
  std::vector<double> out;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    io::Header h;
    h.set("v", item);
    out.push_back(h.get_double("v"));
  }
  return out;
}

std::vector<int> split_ints(const std::string& text) {
  std::vector<int> out;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stoi(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::logic_error&) {
      throw DataError("malformed integer list '" + text + "'");
    }
  }
  return out;
}

io::Header base_header(const std::string& method, const io::Header& metadata) {
  io::Header h;
  h.set("method", method);
  for (const auto& [k, v] : metadata.entries()) h.set("meta." + k, v);
  return h;
}

void put_scaler(io::Header& h, const dsp::Scaler& s) {
  h.set("scaler.min", join(s.min()));
  h.set("scaler.max", join(s.max()));
}

dsp::Scaler get_scaler(const io::Header& h) {
  std::vector<double> lo = split_doubles(h.get("scaler.min"));
  std::vector<double> hi = split_doubles(h.get("scaler.max"));
  if (lo.size() != hi.size() || lo.empty()) throw DataError("scaler bounds are inconsistent");
  return dsp::Scaler(std::move(lo), std::move(hi));
}

void write_networks(const std::filesystem::path& path, io::Header header,
                    const std::vector<std::pair<std::string, const nn::DenseNetwork*>>& nets) {
  std::uint64_t offset = 0;
  for (const auto& [name, net] : nets) offset = nn::write_network(header, name, *net, offset);
  io::ContainerWriter writer(path, "MODEL", kModelFileVersion, header);
  for (const auto& [name, net] : nets) nn::append_network(writer, *net);
  writer.finish();
}

io::Header metadata_of(const io::Header& h) {
  io::Header meta;
  for (const auto& [k, v] : h.entries()) {
    if (k.rfind("meta.", 0) == 0) meta.set(k.substr(5), v);
  }
  return meta;
}

}  // namespace

std::string LoadedModel::method() const {
  switch (model.index()) {
    case 0: return "pretrann";
    case 1: return "ffnn";
    default: return "gmm";
  }
}

void save_model(const std::filesystem::path& path, const PreTraNNModel& model, const io::Header& metadata) {
  io::Header h = base_header("pretrann", metadata);
  h.set("seed", model.seed);
  h.set("classes", join(model.classes));
  put_scaler(h, model.scaler);
  write_networks(path, h, {{"encoder", &model.encoder}, {"decoder", &model.decoder}, {"head", &model.head}});
}

void save_model(const std::filesystem::path& path, const FfnnModel& model, const io::Header& metadata) {
  io::Header h = base_header("ffnn", metadata);
  h.set("seed", model.seed);
  h.set("classes", join(model.classes));
  put_scaler(h, model.scaler);
  write_networks(path, h, {{"net", &model.net}});
}

void save_model(const std::filesystem::path& path, const GmmModel& model, const io::Header& metadata) {
  io::Header h = base_header("gmm", metadata);
  h.set("gmm.components", static_cast<std::uint64_t>(model.components()));
  h.set("gmm.weights", join(model.weights));
  std::vector<double> means;
  std::vector<double> covs;
  for (std::size_t c = 0; c < model.components(); ++c) {
    means.push_back(model.means[c][0]);
    means.push_back(model.means[c][1]);
    for (int r = 0; r < 2; ++r) {
      for (int col = 0; col < 2; ++col) covs.push_back(model.covariances[c](r, col));
    }
  }
  h.set("gmm.means", join(means));
  h.set("gmm.covariances", join(covs));
  h.set("gmm.labels", join(model.labels));
  h.set("gmm.iterations", static_cast<std::uint64_t>(model.iterations));
  h.set("gmm.converged", std::string(model.converged ? "1" : "0"));
  h.set("gmm.log_likelihood", join(model.log_likelihood));
  io::write_container(path, "MODEL", kModelFileVersion, h, {});
}

LoadedModel load_model(const std::filesystem::path& path) {
  const io::Container c = io::read_container(path, "MODEL", kModelFileVersion);
  const io::Header& h = c.header;
  LoadedModel out;
  out.metadata = metadata_of(h);
  const std::string& method = h.get("method");
  if (method == "pretrann") {
    PreTraNNModel m;
    m.seed = h.get_u64("seed");
    m.classes = split_ints(h.get("classes"));
    m.scaler = get_scaler(h);
    m.encoder = nn::read_network(c, "encoder");
    m.decoder = nn::read_network(c, "decoder");
    m.head = nn::read_network(c, "head");
    if (m.encoder.input_dim() != m.scaler.dim() || m.head.input_dim() != m.encoder.output_dim() ||
        m.head.output_dim() != m.classes.size() || m.decoder.input_dim() != m.encoder.output_dim()) {
      throw DataError(path.string() + ": PreTraNN parts do not fit together");
    }
    out.model = std::move(m);
  } else if (method == "ffnn") {
    FfnnModel m;
    m.seed = h.get_u64("seed");
    m.classes = split_ints(h.get("classes"));
    m.scaler = get_scaler(h);
    m.net = nn::read_network(c, "net");
    if (m.net.input_dim() != m.scaler.dim() || m.net.output_dim() != m.classes.size()) {
      throw DataError(path.string() + ": FFNN network does not match its scaler or classes");
    }
    out.model = std::move(m);
  } else if (method == "gmm") {
    GmmModel m;
    const std::size_t k = h.get_u64("gmm.components");
    m.weights = split_doubles(h.get("gmm.weights"));
    const std::vector<double> means = split_doubles(h.get("gmm.means"));
    const std::vector<double> covs = split_doubles(h.get("gmm.covariances"));
    m.labels = split_ints(h.get("gmm.labels"));
    if (m.weights.size() != k || means.size() != 2 * k || covs.size() != 4 * k ||
        (!m.labels.empty() && m.labels.size() != k)) {
      throw DataError(path.string() + ": GMM parameter lists are inconsistent");
    }
    for (std::size_t i = 0; i < k; ++i) {
      m.means.emplace_back(means[2 * i], means[2 * i + 1]);
      Eigen::Matrix2d cov;
      cov << covs[4 * i], covs[4 * i + 1], covs[4 * i + 2], covs[4 * i + 3];
      m.covariances.push_back(cov);
    }
    m.iterations = h.get_u64("gmm.iterations");
    m.converged = h.get("gmm.converged") == "1";
    m.log_likelihood = split_doubles(h.get("gmm.log_likelihood"));
    out.model = std::move(m);
  } else {
    throw DataError(path.string() + ": unknown model method '" + method + "'");
  }
  return out;
}

}  // namespace qreadout::clf
