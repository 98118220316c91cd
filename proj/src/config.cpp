#include "ecgssl/config.hpp"

#include "ecgssl/errors.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace ecgssl::config {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T v{};
  const auto t = trim(text);
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
    throw ParameterError("config key '" + key + "': cannot parse '" + text + "'");
  }
  return v;
}

bool parse_bool(const std::string& key, const std::string& text) {
  const auto t = trim(text);
  if (t == "true" || t == "1") return true;
  if (t == "false" || t == "0") return false;
  throw ParameterError("config key '" + key + "': expected true or false, got '" + text + "'");
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) out += (i ? "," : "") + items[i];
  return out;
}

using Setter = std::function<void(RunConfig&, const std::string&, const std::string&)>;
using Getter = std::function<std::string(const RunConfig&)>;

struct Key {
  Setter set;
  Getter get;
};

template <typename T, typename Access>
Key number_key(Access access) {
  return {[access](RunConfig& c, const std::string& k, const std::string& v) { access(c) = parse_number<T>(k, v); },
          [access](const RunConfig& c) {
            if constexpr (std::is_floating_point_v<T>) {
              return format_number(access(c));
            } else {
              return std::to_string(access(c));
            }
          }};
}

// Ordered table; echo() walks it front to back.
const std::vector<std::pair<std::string, Key>>& keys() {
  static const std::vector<std::pair<std::string, Key>> table = [] {
    std::vector<std::pair<std::string, Key>> t;
    t.emplace_back("format_version", Key{[](RunConfig& c, const std::string& k, const std::string& v) {
                                           const auto version = parse_number<int>(k, v);
                                           if (version > kConfigFormatVersion || version < 1) {
                                             throw FormatError("config format version " + std::to_string(version) +
                                                               " is not supported (this build reads version " +
                                                               std::to_string(kConfigFormatVersion) + ")");
                                           }
                                           c.format_version = version;
                                         },
                                         [](const RunConfig& c) { return std::to_string(c.format_version); }});
    t.emplace_back("seed", number_key<std::uint64_t>([](auto& c) -> auto& { return c.train.seed; }));
    t.emplace_back("data", Key{[](RunConfig& c, const std::string&, const std::string& v) { c.data = trim(v); },
                               [](const RunConfig& c) { return c.data; }});
    t.emplace_back("model", Key{[](RunConfig& c, const std::string&, const std::string& v) { c.model = trim(v); },
                                [](const RunConfig& c) { return c.model; }});
    t.emplace_back("lr", number_key<double>([](auto& c) -> auto& { return c.train.lr; }));
    t.emplace_back("batch_size", number_key<int>([](auto& c) -> auto& { return c.train.batch_size; }));
    t.emplace_back("pretext_epochs", number_key<int>([](auto& c) -> auto& { return c.train.pretext_epochs; }));
    t.emplace_back("emotion_epochs", number_key<int>([](auto& c) -> auto& { return c.train.emotion_epochs; }));
    t.emplace_back("alphas", Key{[](RunConfig& c, const std::string& k, const std::string& v) {
                                   std::vector<double> a;
                                   for (const auto& item : split_list(v)) a.push_back(parse_number<double>(k, item));
                                   c.train.alphas = a;
                                 },
                                 [](const RunConfig& c) {
                                   std::vector<std::string> items;
                                   for (double a : c.train.alphas) items.push_back(format_number(a));
                                   return join(items);
                                 }});
    t.emplace_back("dropout", number_key<double>([](auto& c) -> auto& { return c.train.dropout; }));
    t.emplace_back("emotion_dropout", number_key<double>([](auto& c) -> auto& { return c.train.emotion_dropout; }));
    t.emplace_back("l2_beta", number_key<double>([](auto& c) -> auto& { return c.train.l2_beta; }));
    t.emplace_back("kfolds", number_key<int>([](auto& c) -> auto& { return c.train.kfolds; }));
    t.emplace_back("label_fraction", number_key<double>([](auto& c) -> auto& { return c.train.label_fraction; }));
    t.emplace_back("fold_unit", Key{[](RunConfig& c, const std::string& k, const std::string& v) {
                                      const auto t2 = trim(v);
                                      if (t2 == "segment") c.train.fold_unit = training::FoldUnit::Segment;
                                      else if (t2 == "subject") c.train.fold_unit = training::FoldUnit::Subject;
                                      else throw ParameterError("config key '" + k + "': expected segment or subject");
                                    },
                                    [](const RunConfig& c) {
                                      return std::string(c.train.fold_unit == training::FoldUnit::Subject ? "subject"
                                                                                                           : "segment");
                                    }});
    t.emplace_back("binarize_scope", Key{[](RunConfig& c, const std::string& k, const std::string& v) {
                                           const auto t2 = trim(v);
                                           if (t2 == "global") c.train.binarize_scope = training::BinarizeScope::Global;
                                           else if (t2 == "per_fold") c.train.binarize_scope = training::BinarizeScope::PerFold;
                                           else throw ParameterError("config key '" + k + "': expected global or per_fold");
                                         },
                                         [](const RunConfig& c) {
                                           return std::string(c.train.binarize_scope == training::BinarizeScope::PerFold
                                                                  ? "per_fold"
                                                                  : "global");
                                         }});
    t.emplace_back("targets", Key{[](RunConfig& c, const std::string&, const std::string& v) { c.targets = split_list(v); },
                                  [](const RunConfig& c) { return join(c.targets); }});
    t.emplace_back("supervised_baseline",
                   Key{[](RunConfig& c, const std::string& k, const std::string& v) { c.supervised_baseline = parse_bool(k, v); },
                       [](const RunConfig& c) { return std::string(c.supervised_baseline ? "true" : "false"); }});
    t.emplace_back("pretext_head_units", number_key<models::Index>([](auto& c) -> auto& { return c.pretext_head_units; }));
    t.emplace_back("noise_sigma_rel", number_key<double>([](auto& c) -> auto& { return c.transform.noise_sigma_rel; }));
    t.emplace_back("scale_factor", number_key<double>([](auto& c) -> auto& { return c.transform.scale_factor; }));
    t.emplace_back("permute_pieces", number_key<int>([](auto& c) -> auto& { return c.transform.permute_pieces; }));
    t.emplace_back("warp_pieces", number_key<int>([](auto& c) -> auto& { return c.transform.warp_pieces; }));
    t.emplace_back("warp_stretch", number_key<double>([](auto& c) -> auto& { return c.transform.warp_stretch; }));
    t.emplace_back("transform_seed", Key{[](RunConfig& c, const std::string& k, const std::string& v) {
                                           if (trim(v).empty()) c.transform_seed.reset();
                                           else c.transform_seed = parse_number<std::uint64_t>(k, v);
                                         },
                                         [](const RunConfig& c) {
                                           return c.transform_seed ? std::to_string(*c.transform_seed) : std::string();
                                         }});
    t.emplace_back("segment_index", number_key<int>([](auto& c) -> auto& { return c.segment_index; }));
    t.emplace_back("synth_count", number_key<int>([](auto& c) -> auto& { return c.synth.count; }));
    t.emplace_back("synth_low_hr_min", number_key<double>([](auto& c) -> auto& { return c.synth.low_hr_min; }));
    t.emplace_back("synth_low_hr_max", number_key<double>([](auto& c) -> auto& { return c.synth.low_hr_max; }));
    t.emplace_back("synth_high_hr_min", number_key<double>([](auto& c) -> auto& { return c.synth.high_hr_min; }));
    t.emplace_back("synth_high_hr_max", number_key<double>([](auto& c) -> auto& { return c.synth.high_hr_max; }));
    t.emplace_back("synth_sample_rate_hz", number_key<double>([](auto& c) -> auto& { return c.synth.sample_rate_hz; }));
    t.emplace_back("synth_duration_s", number_key<double>([](auto& c) -> auto& { return c.synth.duration_s; }));
    return t;
  }();
  return table;
}

}  // namespace

std::string format_number(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

models::ArchitectureSpec RunConfig::architecture() const {
  models::ArchitectureSpec arch;
  arch.pretext_head_units = pretext_head_units;
  return arch;
}

transforms::TransformParams RunConfig::transform_params() const {
  auto p = transform;
  p.rng_seed = transform_seed.value_or(train.seed);
  return p;
}

void RunConfig::validate() const {
  train.validate();
  transform_params().validate();
  if (pretext_head_units != 1 && pretext_head_units != 2) {
    throw ParameterError("pretext_head_units must be 1 or 2, got " + std::to_string(pretext_head_units));
  }
  if (segment_index < 0) throw ParameterError("segment_index must be non-negative");
}

void set(RunConfig& config, const std::string& key, const std::string& value) {
  for (const auto& [name, k] : keys()) {
    if (name == key) {
      k.set(config, key, value);
      return;
    }
  }
  throw ParameterError("unknown config key '" + key + "'");
}

void apply_text(RunConfig& config, std::istream& in, const std::string& origin) {
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ParameterError(origin + ":" + std::to_string(number) + ": expected key = value");
    }
    try {
      set(config, trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
    } catch (const ParameterError& e) {
      throw ParameterError(origin + ":" + std::to_string(number) + ": " + e.what());
    }
  }
}

void apply_file(RunConfig& config, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParameterError("cannot open config file " + path.string());
  apply_text(config, in, path.string());
}

std::vector<std::pair<std::string, std::string>> entries(const RunConfig& config) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& [name, k] : keys()) out.emplace_back(name, k.get(config));
  return out;
}

std::string echo(const RunConfig& config) {
  std::string out;
  for (const auto& [name, value] : entries(config)) out += name + " = " + value + "\n";
  return out;
}

}  // namespace ecgssl::config
