#include "ecgssl/model_io.hpp"

#include "ecgssl/errors.hpp"

#include <json.hpp>

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <map>

namespace ecgssl::models {

namespace {

using json = nlohmann::json;

constexpr std::array<char, 8> kMagic = {'E', 'C', 'G', 'S', 'S', 'L', 'M', '\0'};

std::uint32_t to_le(std::uint32_t v) {
  if constexpr (std::endian::native == std::endian::big) return __builtin_bswap32(v);
  return v;
}

void write_u32(std::ostream& out, std::uint32_t v) {
  v = to_le(v);
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

std::uint32_t read_u32(std::istream& in) {
  std::uint32_t v = 0;
  if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) throw FormatError("model file truncated in header");
  return to_le(v);
}

json spec_to_json(const ArchitectureSpec& a) {
  json blocks = json::array();
  for (const auto& b : a.blocks) blocks.push_back({{"kernel", b.kernel}, {"filters", b.filters}});
  return {{"input_length", a.input_length},     {"blocks", blocks},
          {"convs_per_block", a.convs_per_block}, {"pool", a.pool},
          {"pool_stride", a.pool_stride},       {"task_count", a.task_count},
          {"pretext_hidden", a.pretext_hidden}, {"pretext_head_units", a.pretext_head_units},
          {"emotion_hidden", a.emotion_hidden}, {"emotion_classes", a.emotion_classes}};
}

ArchitectureSpec spec_from_json(const json& j) {
  ArchitectureSpec a;
  a.input_length = j.at("input_length").get<Index>();
  a.blocks.clear();
  for (const auto& b : j.at("blocks")) a.blocks.push_back({b.at("kernel").get<Index>(), b.at("filters").get<Index>()});
  a.convs_per_block = j.at("convs_per_block").get<Index>();
  a.pool = j.at("pool").get<Index>();
  a.pool_stride = j.at("pool_stride").get<Index>();
  a.task_count = j.at("task_count").get<int>();
  a.pretext_hidden = j.at("pretext_hidden").get<Index>();
  a.pretext_head_units = j.at("pretext_head_units").get<Index>();
  a.emotion_hidden = j.at("emotion_hidden").get<Index>();
  a.emotion_classes = j.at("emotion_classes").get<Index>();
  if (a.blocks.empty() || a.input_length < 1 || a.task_count < 1) throw FormatError("model spec is malformed");
  return a;
}

void write_container(std::ostream& out, const std::string& kind, const ArchitectureSpec& arch,
                     const std::vector<ParamRef<float>>& params) {
  json arrays = json::array();
  std::uint64_t offset = 0;
  for (const auto& p : params) {
    const auto count = static_cast<std::uint64_t>(p.tensor->size());
    arrays.push_back({{"name", p.name},
                      {"shape", p.tensor->shape()},
                      {"trainable", p.trainable},
                      {"regularized", p.regularized},
                      {"offset", offset},
                      {"count", count}});
    offset += count;
  }
  const json manifest = {
      {"architecture", kind}, {"format_version", kModelFormatVersion}, {"spec", spec_to_json(arch)}, {"arrays", arrays}};
  const std::string text = manifest.dump();

  out.write(kMagic.data(), kMagic.size());
  write_u32(out, kModelFormatVersion);
  write_u32(out, static_cast<std::uint32_t>(text.size()));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const auto& p : params) {
    const auto& flat = p.tensor->flat();
    for (Index i = 0; i < flat.size(); ++i) write_u32(out, std::bit_cast<std::uint32_t>(flat[i]));
  }
  if (!out) throw FormatError("failed writing model container");
}

struct Container {
  std::string kind;
  ArchitectureSpec arch;
  json arrays;
  std::vector<float> payload;
};

Container read_container(std::istream& in) {
  std::array<char, 8> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kMagic) throw FormatError("not a model file (bad magic)");
  const auto version = read_u32(in);
  if (version > kModelFormatVersion) {
    throw FormatError("model format version " + std::to_string(version) + " is newer than the supported version " +
                      std::to_string(kModelFormatVersion));
  }
  if (version == 0) throw FormatError("model format version 0 is invalid");
  const auto length = read_u32(in);
  std::string text(length, '\0');
  if (!in.read(text.data(), length)) throw FormatError("model file truncated in manifest");

  Container c;
  try {
    const auto manifest = json::parse(text);
    c.kind = manifest.at("architecture").get<std::string>();
    c.arch = spec_from_json(manifest.at("spec"));
    c.arrays = manifest.at("arrays");
  } catch (const json::exception& e) {
    throw FormatError(std::string("model manifest is malformed: ") + e.what());
  }
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() % 4 != 0) throw FormatError("model payload is not a whole number of floats");
  c.payload.resize(bytes.size() / 4);
  for (std::size_t i = 0; i < c.payload.size(); ++i) {
    std::uint32_t bits;
    std::memcpy(&bits, bytes.data() + 4 * i, sizeof bits);
    c.payload[i] = std::bit_cast<float>(to_le(bits));
  }
  return c;
}

// Copies payload arrays into `params` by name; restores trainable flags per block/head.
void fill_params(const Container& c, std::vector<ParamRef<float>> params, std::map<std::string, bool>& trainable) {
  std::map<std::string, const json*> by_name;
  for (const auto& a : c.arrays) by_name[a.at("name").get<std::string>()] = &a;
  if (by_name.size() != params.size()) {
    throw FormatError("model file holds " + std::to_string(by_name.size()) + " arrays, architecture needs " +
                      std::to_string(params.size()));
  }
  for (auto& p : params) {
    const auto it = by_name.find(p.name);
    if (it == by_name.end()) throw FormatError("model file lacks array '" + p.name + "'");
    const auto& a = *it->second;
    const auto shape = a.at("shape").get<Shape>();
    if (shape != p.tensor->shape()) {
      throw FormatError("array '" + p.name + "' has shape " + nn::shape_string(shape) + ", expected " +
                        nn::shape_string(p.tensor->shape()));
    }
    const auto offset = a.at("offset").get<std::uint64_t>();
    const auto count = a.at("count").get<std::uint64_t>();
    if (count != static_cast<std::uint64_t>(p.tensor->size()) || offset + count > c.payload.size()) {
      throw FormatError("array '" + p.name + "' lies outside the payload");
    }
    for (std::uint64_t i = 0; i < count; ++i) p.tensor->flat()[static_cast<Index>(i)] = c.payload[offset + i];
    trainable[p.name] = a.at("trainable").get<bool>();
  }
}

void restore_trunk_flags(Trunk<float>& trunk, const std::map<std::string, bool>& trainable) {
  for (std::size_t b = 0; b < trunk.blocks.size(); ++b) {
    trunk.blocks[b].trainable = trainable.at("trunk.b" + std::to_string(b + 1) + ".conv1.kernel");
  }
}

template <typename Network>
Network load_network(std::istream& in, const std::string& kind) {
  const auto c = read_container(in);
  if (c.kind != kind) throw FormatError("model file holds a '" + c.kind + "' network, expected '" + kind + "'");
  auto net = Network::zeros(c.arch);
  std::map<std::string, bool> trainable;
  fill_params(c, net.parameters(), trainable);
  restore_trunk_flags(net.trunk, trainable);
  return net;
}

template <typename Network>
void save_file(const std::filesystem::path& path, const Network& net) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write model file " + path.string());
  save_model(out, net);
}

}  // namespace

void save_model(std::ostream& out, const PretextNetwork<float>& net) {
  auto copy = net;
  write_container(out, "pretext", net.arch, copy.parameters());
}

void save_model(std::ostream& out, const EmotionNetwork<float>& net) {
  auto copy = net;
  write_container(out, "emotion", net.arch, copy.parameters());
}

void save_model(const std::filesystem::path& path, const PretextNetwork<float>& net) { save_file(path, net); }
void save_model(const std::filesystem::path& path, const EmotionNetwork<float>& net) { save_file(path, net); }

PretextNetwork<float> load_pretext_model(std::istream& in) { return load_network<PretextNetwork<float>>(in, "pretext"); }
EmotionNetwork<float> load_emotion_model(std::istream& in) { return load_network<EmotionNetwork<float>>(in, "emotion"); }

PretextNetwork<float> load_pretext_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open model file " + path.string());
  return load_pretext_model(in);
}

EmotionNetwork<float> load_emotion_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open model file " + path.string());
  return load_emotion_model(in);
}

}  // namespace ecgssl::models
