#pragma once

#include "ecgssl/corpus.hpp"
#include "ecgssl/models.hpp"
#include "ecgssl/training.hpp"
#include "ecgssl/transforms.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace ecgssl::config {

inline constexpr int kConfigFormatVersion = 1;

// Everything a run needs, resolvable from a flat `key = value` file plus flag overrides.
struct RunConfig {
  int format_version = kConfigFormatVersion;
  training::TrainConfig train;
  transforms::TransformParams transform;
  std::optional<std::uint64_t> transform_seed;  // unset: follows train.seed
  models::Index pretext_head_units = 1;
  corpus::SynthOptions synth;

  std::string data;   // recordings: manifest, CSV, or directory
  std::string model;  // pretext model for train-eval
  std::vector<std::string> targets;
  bool supervised_baseline = false;
  int segment_index = 0;  // transform preview

  [[nodiscard]] models::ArchitectureSpec architecture() const;
  // Transform params with rng_seed resolved.
  [[nodiscard]] transforms::TransformParams transform_params() const;

  void validate() const;
};

// Sets one key; throws ParameterError for unknown keys or unparsable values.
void set(RunConfig& config, const std::string& key, const std::string& value);

// Lines are `key = value`; blank lines and lines starting with '#' are skipped.
void apply_text(RunConfig& config, std::istream& in, const std::string& origin = "<config>");
void apply_file(RunConfig& config, const std::filesystem::path& path);

// (key, value) for every key in a fixed order.
std::vector<std::pair<std::string, std::string>> entries(const RunConfig& config);

// Every key, one per line in a fixed order; apply_text(echo(c)) reproduces c.
std::string echo(const RunConfig& config);

// Shortest text that parses back to the same double.
std::string format_number(double v);

}  // namespace ecgssl::config
