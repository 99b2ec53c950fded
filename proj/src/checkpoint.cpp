#include "hullsight/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "json.hpp"

namespace hullsight {

namespace {

constexpr char kMagic[4] = {'D', 'D', 'S', 'R'};

template <typename T>
void put_le(std::vector<std::uint8_t>& out, T v) {
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

template <typename T>
T get_le(std::span<const std::uint8_t> b, std::size_t pos) {
  T v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(b[pos + i]) << (8 * i);
  return v;
}

nlohmann::json shape_json(const Shape& s) { return nlohmann::json::array({s.n, s.c, s.h, s.w}); }

}  // namespace

std::vector<std::uint8_t> serialize(const Checkpoint& ckpt) {
  const auto manifest = parameter_manifest(ckpt.model);
  if (manifest.size() != ckpt.parameters.size()) throw ConfigError("checkpoint parameters do not match the model");
  nlohmann::json header;
  header["format"] = "DDSR";
  header["version"] = Checkpoint::kFormatVersion;
  header["model"] = {{"base_channels", ckpt.model.base_channels}, {"r1", ckpt.model.r1},
                     {"r2", ckpt.model.r2},           {"sr_scale", ckpt.model.sr_scale},
                     {"in_channels", ckpt.model.in_channels}};
  header["seed"] = ckpt.seed;
  header["epoch"] = ckpt.epoch;
  header["parameters"] = nlohmann::json::array();
  for (std::size_t i = 0; i < manifest.size(); ++i) {
    const auto& [name, t] = ckpt.parameters[i];
    if (name != manifest[i].name || t.shape() != manifest[i].shape) {
      throw ConfigError("checkpoint parameter '" + name + "' does not match manifest entry '" + manifest[i].name + "'");
    }
    header["parameters"].push_back({{"name", name}, {"shape", shape_json(t.shape())}});
  }
  const std::string text = header.dump();

  std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
  put_le<std::uint32_t>(out, Checkpoint::kFormatVersion);
  put_le<std::uint64_t>(out, text.size());
  out.insert(out.end(), text.begin(), text.end());
  for (const auto& [name, t] : ckpt.parameters)
    for (float v : t.values()) put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(v));
  return out;
}

Checkpoint deserialize(std::span<const std::uint8_t> b) {
  if (b.size() < 16 || std::memcmp(b.data(), kMagic, 4) != 0) throw FormatError("not a DDSR checkpoint (bad magic)");
  const auto version = get_le<std::uint32_t>(b, 4);
  if (version != Checkpoint::kFormatVersion) {
    throw FormatError("unsupported checkpoint version " + std::to_string(version));
  }
  const auto header_len = get_le<std::uint64_t>(b, 8);
  if (header_len > b.size() - 16) throw FormatError("truncated checkpoint header");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(b.begin() + 16, b.begin() + 16 + static_cast<std::ptrdiff_t>(header_len));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed checkpoint header: ") + e.what());
  }

  Checkpoint ckpt;
  try {
    if (header.at("format") != "DDSR" || header.at("version") != version) {
      throw FormatError("checkpoint header format/version mismatch");
    }
    const auto& m = header.at("model");
    ckpt.model = {m.at("base_channels"), m.at("r1"), m.at("r2"), m.at("sr_scale"), m.at("in_channels")};
    ckpt.seed = header.at("seed");
    ckpt.epoch = header.at("epoch");
    ckpt.model.validate();
    const auto manifest = parameter_manifest(ckpt.model);
    const auto& entries = header.at("parameters");
    if (entries.size() != manifest.size()) throw FormatError("checkpoint manifest does not match its model config");
    std::size_t pos = 16 + header_len;
    Index expected_floats = 0;
    for (const auto& spec : manifest) expected_floats += spec.shape.numel();
    if (b.size() - pos != static_cast<std::size_t>(expected_floats) * 4) {
      throw FormatError("checkpoint payload is " + std::to_string(b.size() - pos) + " bytes, manifest needs " +
                        std::to_string(expected_floats * 4));
    }
    for (std::size_t i = 0; i < manifest.size(); ++i) {
      const auto& e = entries[i];
      const auto dims = e.at("shape").get<std::vector<Index>>();
      if (e.at("name") != manifest[i].name || dims.size() != 4 ||
          Shape{dims[0], dims[1], dims[2], dims[3]} != manifest[i].shape) {
        throw FormatError("checkpoint manifest entry " + std::to_string(i) + " does not match its model config");
      }
      Tensor<float> t(manifest[i].shape);
      for (float& v : t.values()) {
        v = std::bit_cast<float>(get_le<std::uint32_t>(b, pos));
        pos += 4;
      }
      ckpt.parameters.emplace_back(manifest[i].name, std::move(t));
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed checkpoint header: ") + e.what());
  } catch (const ConfigError& e) {
    throw FormatError(std::string("invalid checkpoint model: ") + e.what());
  }
  return ckpt;
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  const auto bytes = serialize(ckpt);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write checkpoint '" + path.string() + "'");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw FormatError("failed writing checkpoint '" + path.string() + "'");
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open checkpoint '" + path.string() + "'");
  const std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  return deserialize(bytes);
}

}  // namespace hullsight
