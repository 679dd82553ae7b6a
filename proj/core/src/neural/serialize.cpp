#include "ecgbench/neural/serialize.hpp"

#include <zlib.h>

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "ecgbench/errors.hpp"

namespace ecgbench::neural {

namespace {

constexpr char kMagic[4] = {'E', 'C', 'G', 'N'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) {
    out.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xff));
  }
}

void put_u64(std::vector<unsigned char>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) {
    out.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xff));
  }
}

void put_f64(std::vector<unsigned char>& out, double v) {
  put_u64(out, std::bit_cast<std::uint64_t>(v));
}

class Reader {
 public:
  Reader(const unsigned char* data, std::size_t size)
      : data_(data), size_(size) {}

  const unsigned char* take(std::size_t count) {
    if (count > size_ - pos_) {
      throw FormatError("truncated model file");
    }
    const unsigned char* p = data_ + pos_;
    pos_ += count;
    return p;
  }

  std::uint32_t u32() {
    const unsigned char* p = take(4);
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | p[i];
    return v;
  }

  std::uint64_t u64() {
    const unsigned char* p = take(8);
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
    return v;
  }

  double f64() { return std::bit_cast<double>(u64()); }

  std::size_t position() const { return pos_; }

 private:
  const unsigned char* data_;
  std::size_t size_;
  std::size_t pos_ = 0;
};

struct ParamSizes {
  std::size_t weights = 0;
  std::size_t bias = 0;
  std::size_t running = 0;
};

ParamSizes expected_sizes(const LayerConfig& cfg) {
  ParamSizes s;
  switch (cfg.kind) {
    case LayerKind::conv1d:
      s.weights = cfg.out_channels * cfg.in_channels * cfg.kernel;
      s.bias = cfg.out_channels;
      break;
    case LayerKind::dense:
      s.weights = cfg.out_features * cfg.in_features;
      s.bias = cfg.out_features;
      break;
    case LayerKind::batchnorm1d:
      s.weights = cfg.out_channels;
      s.bias = cfg.out_channels;
      s.running = cfg.out_channels;
      break;
    default:
      break;
  }
  return s;
}

nlohmann::json describe_layer(const Layer& layer) {
  const LayerConfig& cfg = layer.cfg;
  nlohmann::json j;
  j["kind"] = layer_kind_name(cfg.kind);
  j["input"] = cfg.input;
  switch (cfg.kind) {
    case LayerKind::conv1d:
      j["in_channels"] = cfg.in_channels;
      j["out_channels"] = cfg.out_channels;
      j["kernel"] = cfg.kernel;
      j["stride"] = cfg.stride;
      j["padding"] = cfg.padding == Padding::same ? "same" : "valid";
      j["projection"] = cfg.is_projection;
      break;
    case LayerKind::batchnorm1d:
      j["channels"] = cfg.out_channels;
      j["momentum"] = cfg.momentum;
      j["epsilon"] = cfg.epsilon;
      break;
    case LayerKind::maxpool1d:
    case LayerKind::avgpool1d:
      j["pool_size"] = cfg.pool_size;
      j["pool_stride"] = cfg.pool_stride;
      break;
    case LayerKind::dropout:
      j["drop_probability"] = cfg.drop_probability;
      break;
    case LayerKind::dense:
      j["in_features"] = cfg.in_features;
      j["out_features"] = cfg.out_features;
      break;
    case LayerKind::add_residual:
      j["skip"] = cfg.skip;
      break;
    default:
      break;
  }
  return j;
}

LayerConfig parse_layer(const nlohmann::json& j) {
  LayerConfig cfg;
  cfg.kind = layer_kind_from_name(j.at("kind").get<std::string>());
  cfg.input = j.at("input").get<int>();
  switch (cfg.kind) {
    case LayerKind::conv1d: {
      cfg.in_channels = j.at("in_channels").get<std::size_t>();
      cfg.out_channels = j.at("out_channels").get<std::size_t>();
      cfg.kernel = j.at("kernel").get<std::size_t>();
      cfg.stride = j.at("stride").get<std::size_t>();
      const std::string padding = j.at("padding").get<std::string>();
      if (padding == "same") {
        cfg.padding = Padding::same;
      } else if (padding == "valid") {
        cfg.padding = Padding::valid;
      } else {
        throw FormatError("unknown padding mode '" + padding + "'");
      }
      cfg.is_projection = j.value("projection", false);
      break;
    }
    case LayerKind::batchnorm1d:
      cfg.in_channels = cfg.out_channels = j.at("channels").get<std::size_t>();
      cfg.momentum = j.at("momentum").get<double>();
      cfg.epsilon = j.at("epsilon").get<double>();
      break;
    case LayerKind::maxpool1d:
    case LayerKind::avgpool1d:
      cfg.pool_size = j.at("pool_size").get<std::size_t>();
      cfg.pool_stride = j.at("pool_stride").get<std::size_t>();
      break;
    case LayerKind::dropout:
      cfg.drop_probability = j.at("drop_probability").get<double>();
      break;
    case LayerKind::dense:
      cfg.in_features = j.at("in_features").get<std::size_t>();
      cfg.out_features = j.at("out_features").get<std::size_t>();
      break;
    case LayerKind::add_residual:
      cfg.skip = j.at("skip").get<int>();
      break;
    default:
      break;
  }
  return cfg;
}

}  // namespace

std::vector<unsigned char> serialize_model(const Model& model) {
  nlohmann::json descriptor;
  descriptor["architecture"] = model.architecture;
  descriptor["in_channels"] = model.in_channels;
  descriptor["num_classes"] = model.num_classes;
  descriptor["input_length_hint"] = model.input_length_hint;
  descriptor["min_input_length"] = model.min_input_length;
  descriptor["layers"] = nlohmann::json::array();
  std::uint64_t values = 0;
  for (const Layer& layer : model.layers) {
    descriptor["layers"].push_back(describe_layer(layer));
    values += layer.weights.size() + layer.bias.size() +
              layer.running_mean.size() + layer.running_var.size();
  }
  const std::string text = descriptor.dump();

  std::vector<unsigned char> out;
  out.reserve(4 + 4 + 8 + text.size() + 8 + values * 8 + 4);
  out.insert(out.end(), kMagic, kMagic + 4);
  put_u32(out, kVersion);
  put_u64(out, text.size());
  out.insert(out.end(), text.begin(), text.end());
  put_u64(out, values);
  for (const Layer& layer : model.layers) {
    for (double v : layer.weights) put_f64(out, v);
    for (double v : layer.bias) put_f64(out, v);
    for (double v : layer.running_mean) put_f64(out, v);
    for (double v : layer.running_var) put_f64(out, v);
  }
  const auto crc = static_cast<std::uint32_t>(
      crc32(0L, out.data(), static_cast<uInt>(out.size())));
  put_u32(out, crc);
  return out;
}

Model deserialize_model(const std::vector<unsigned char>& bytes) {
  if (bytes.size() < 12) throw FormatError("truncated model file");
  const std::size_t body = bytes.size() - 4;
  const auto expected = static_cast<std::uint32_t>(
      crc32(0L, bytes.data(), static_cast<uInt>(body)));
  Reader footer(bytes.data() + body, 4);
  if (footer.u32() != expected) {
    throw FormatError("model file checksum mismatch");
  }

  Reader in(bytes.data(), body);
  const unsigned char* magic = in.take(4);
  if (std::memcmp(magic, kMagic, 4) != 0) {
    throw FormatError("not a model file (bad magic)");
  }
  const std::uint32_t version = in.u32();
  if (version != kVersion) {
    throw FormatError("unsupported model format version " +
                      std::to_string(version));
  }
  const std::uint64_t text_size = in.u64();
  const unsigned char* text = in.take(text_size);

  nlohmann::json descriptor;
  try {
    descriptor = nlohmann::json::parse(text, text + text_size);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad layer-graph descriptor: ") + e.what());
  }

  Model model;
  std::uint64_t values = 0;
  try {
    model.architecture = descriptor.at("architecture").get<std::string>();
    model.in_channels = descriptor.at("in_channels").get<std::size_t>();
    model.num_classes = descriptor.at("num_classes").get<std::size_t>();
    model.input_length_hint =
        descriptor.at("input_length_hint").get<std::size_t>();
    model.min_input_length =
        descriptor.at("min_input_length").get<std::size_t>();
    for (const nlohmann::json& j : descriptor.at("layers")) {
      Layer layer;
      layer.cfg = parse_layer(j);
      const ParamSizes sizes = expected_sizes(layer.cfg);
      layer.weights.resize(sizes.weights);
      layer.bias.resize(sizes.bias);
      layer.running_mean.resize(sizes.running);
      layer.running_var.resize(sizes.running);
      values += sizes.weights + sizes.bias + 2 * sizes.running;
      model.layers.push_back(std::move(layer));
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad layer-graph descriptor: ") + e.what());
  }

  if (in.u64() != values) {
    throw FormatError("parameter blob size does not match the layer graph");
  }
  for (Layer& layer : model.layers) {
    for (double& v : layer.weights) v = in.f64();
    for (double& v : layer.bias) v = in.f64();
    for (double& v : layer.running_mean) v = in.f64();
    for (double& v : layer.running_var) v = in.f64();
  }
  if (in.position() != body) {
    throw FormatError("trailing bytes after the parameter blob");
  }
  return model;
}

void save_model(const Model& model, const std::filesystem::path& path) {
  const std::vector<unsigned char> bytes = serialize_model(model);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open '" + path.string() + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("failed to write '" + path.string() + "'");
}

Model load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::vector<unsigned char> bytes(
      (std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize_model(bytes);
}

}  // namespace ecgbench::neural
