#include "ccge/nn/checkpoint.hpp"

#include <fstream>
#include <sstream>

namespace ccge::nn {
namespace {

using nlohmann::json;

json tensor_to_json(const Matrix<float>& m) {
  std::vector<float> data;
  data.reserve(static_cast<std::size_t>(m.size()));
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
  }
  return json{{"shape", {m.rows(), m.cols()}}, {"data", data}};
}

json tensor_to_json(const Vector<float>& v) {
  std::vector<float> data(v.data(), v.data() + v.size());
  return json{{"shape", {v.size()}}, {"data", data}};
}

const json& require(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw CheckpointFormatError("checkpoint: missing '" + std::string(key) + "' in " + where);
  }
  return obj.at(key);
}

std::vector<float> read_data(const json& tensor, const std::string& tensor_name,
                             const std::vector<long long>& expected_shape) {
  const json& shape = require(tensor, "shape", tensor_name);
  const json& data = require(tensor, "data", tensor_name);
  if (!shape.is_array() || !data.is_array()) {
    throw CheckpointFormatError("checkpoint: tensor '" + tensor_name + "' is malformed");
  }
  std::vector<long long> got;
  for (const auto& d : shape) {
    if (!d.is_number_integer()) {
      throw CheckpointFormatError("checkpoint: tensor '" + tensor_name + "' has a bad shape");
    }
    got.push_back(d.get<long long>());
  }
  if (got != expected_shape) {
    std::ostringstream msg;
    msg << "checkpoint: tensor '" << tensor_name << "' has shape [";
    for (std::size_t i = 0; i < got.size(); ++i) msg << (i ? "," : "") << got[i];
    msg << "], expected [";
    for (std::size_t i = 0; i < expected_shape.size(); ++i) msg << (i ? "," : "") << expected_shape[i];
    msg << "]";
    throw CheckpointShapeError(msg.str());
  }
  long long count = 1;
  for (long long d : got) count *= d;
  if (static_cast<long long>(data.size()) != count) {
    throw CheckpointShapeError("checkpoint: tensor '" + tensor_name + "' holds " +
                               std::to_string(data.size()) + " values, shape needs " +
                               std::to_string(count));
  }
  std::vector<float> out;
  out.reserve(data.size());
  for (const auto& x : data) {
    if (!x.is_number()) {
      throw CheckpointFormatError("checkpoint: tensor '" + tensor_name + "' has non-numeric data");
    }
    out.push_back(x.get<float>());
  }
  return out;
}

}  // namespace

json network_to_json(const Mlp<float>& net) {
  json tensors = json::object();
  for (std::size_t l = 0; l < net.layers().size(); ++l) {
    const std::string prefix = "layer" + std::to_string(l);
    tensors[prefix + ".weight"] = tensor_to_json(net.layers()[l].weight);
    tensors[prefix + ".bias"] = tensor_to_json(net.layers()[l].bias);
  }
  return json{{"layer_sizes", net.layer_sizes()}, {"hidden_activation", "relu"}, {"tensors", tensors}};
}

Mlp<float> network_from_json(const json& doc, const std::string& name) {
  const json& sizes_json = require(doc, "layer_sizes", "network '" + name + "'");
  std::vector<int> sizes;
  try {
    sizes = sizes_json.get<std::vector<int>>();
  } catch (const json::exception&) {
    throw CheckpointFormatError("checkpoint: network '" + name + "' has malformed layer_sizes");
  }
  if (sizes.size() < 2 || std::any_of(sizes.begin(), sizes.end(), [](int s) { return s <= 0; })) {
    throw CheckpointFormatError("checkpoint: network '" + name + "' has invalid layer_sizes");
  }
  if (doc.contains("hidden_activation") && doc.at("hidden_activation") != "relu") {
    throw CheckpointFormatError("checkpoint: network '" + name + "' uses an unsupported activation");
  }
  const json& tensors = require(doc, "tensors", "network '" + name + "'");
  Mlp<float> net(sizes);
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    const std::string prefix = name + ".layer" + std::to_string(l);
    const std::string wkey = "layer" + std::to_string(l) + ".weight";
    const std::string bkey = "layer" + std::to_string(l) + ".bias";
    const auto rows = static_cast<long long>(sizes[l + 1]);
    const auto cols = static_cast<long long>(sizes[l]);
    auto w = read_data(require(tensors, wkey.c_str(), "network '" + name + "'"), prefix + ".weight",
                       {rows, cols});
    auto b = read_data(require(tensors, bkey.c_str(), "network '" + name + "'"), prefix + ".bias", {rows});
    auto& layer = net.layers()[l];
    for (long long r = 0; r < rows; ++r) {
      for (long long c = 0; c < cols; ++c) layer.weight(r, c) = w[static_cast<std::size_t>(r * cols + c)];
    }
    for (long long r = 0; r < rows; ++r) layer.bias(r) = b[static_cast<std::size_t>(r)];
  }
  return net;
}

void checkpoint_save(const Checkpoint& checkpoint, const std::filesystem::path& path) {
  json networks = json::object();
  for (const auto& [name, net] : checkpoint.networks) networks[name] = network_to_json(net);
  json doc{{"format", "ccge-checkpoint"},
           {"version", kCheckpointVersion},
           {"networks", networks},
           {"metadata", checkpoint.metadata}};
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw CheckpointError("checkpoint: cannot write " + tmp);
    out << doc.dump() << '\n';
    if (!out) throw CheckpointError("checkpoint: write failed for " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint checkpoint_load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointFormatError("checkpoint: cannot open " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw CheckpointFormatError("checkpoint: " + path.string() + " is not valid JSON (" + e.what() + ")");
  }
  if (!doc.is_object() || doc.value("format", std::string{}) != "ccge-checkpoint") {
    throw CheckpointFormatError("checkpoint: " + path.string() + " is not a ccge checkpoint");
  }
  const json& version = require(doc, "version", "document");
  if (!version.is_number_integer() || version.get<int>() != kCheckpointVersion) {
    throw CheckpointVersionError("checkpoint: unsupported version " + version.dump() + " (expected " +
                                 std::to_string(kCheckpointVersion) + ")");
  }
  Checkpoint out;
  const json& networks = require(doc, "networks", "document");
  if (!networks.is_object()) throw CheckpointFormatError("checkpoint: 'networks' must be an object");
  for (const auto& [name, net_doc] : networks.items()) {
    out.networks.emplace(name, network_from_json(net_doc, name));
  }
  if (doc.contains("metadata")) out.metadata = doc.at("metadata");
  return out;
}

void load_network_into(const Checkpoint& checkpoint, const std::string& name, Mlp<float>& target) {
  auto it = checkpoint.networks.find(name);
  if (it == checkpoint.networks.end()) {
    throw CheckpointFormatError("checkpoint: no network named '" + name + "'");
  }
  const Mlp<float>& source = it->second;
  const auto& want = target.layer_sizes();
  const auto& have = source.layer_sizes();
  if (want.size() != have.size()) {
    throw CheckpointShapeError("checkpoint: network '" + name + "' has " + std::to_string(have.size() - 1) +
                               " layers, expected " + std::to_string(want.size() - 1));
  }
  for (std::size_t l = 0; l + 1 < want.size(); ++l) {
    if (want[l] != have[l] || want[l + 1] != have[l + 1]) {
      throw CheckpointShapeError("checkpoint: tensor '" + name + ".layer" + std::to_string(l) +
                                 ".weight' has shape [" + std::to_string(have[l + 1]) + "," +
                                 std::to_string(have[l]) + "], expected [" + std::to_string(want[l + 1]) +
                                 "," + std::to_string(want[l]) + "]");
    }
  }
  target.layers() = source.layers();
  target.reset_optimizer();
}

}  // namespace ccge::nn
