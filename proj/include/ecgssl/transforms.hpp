#pragma once

#include "ecgssl/signal.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace ecgssl::transforms {

// Pseudo-label codes. Values are part of every on-disk format; never renumber.
enum class TransformId : int {
  Original = 0,
  Noise = 1,
  Scale = 2,
  Negate = 3,
  HFlip = 4,
  Permute = 5,
  TimeWarp = 6,
};

inline constexpr int kTransformCount = 7;

inline constexpr std::array<TransformId, kTransformCount> kAllTransforms = {
    TransformId::Original, TransformId::Noise,   TransformId::Scale,   TransformId::Negate,
    TransformId::HFlip,    TransformId::Permute, TransformId::TimeWarp};

std::string_view name(TransformId id);
std::optional<TransformId> transform_from_name(std::string_view name);

struct TransformParams {
  double noise_sigma_rel = 0.05;
  double scale_factor = 1.2;
  int permute_pieces = 10;
  int warp_pieces = 4;
  double warp_stretch = 1.25;
  std::uint64_t rng_seed = 0;

  // Throws ParameterError when an invariant does not hold.
  void validate() const;
};

struct PretextSample {
  signal::EcgSegment segment;
  TransformId task;
};

// Gaussian noise with std sigma_rel * std(x); a constant x uses sigma_rel as the absolute std.
Eigen::VectorXd add_noise(const Eigen::VectorXd& x, double sigma_rel, std::uint64_t seed);
Eigen::VectorXd scale(const Eigen::VectorXd& x, double factor);
Eigen::VectorXd negate(const Eigen::VectorXd& x);
Eigen::VectorXd hflip(const Eigen::VectorXd& x);
// Equal contiguous blocks reordered by a seeded permutation; the identity order is redrawn.
Eigen::VectorXd permute(const Eigen::VectorXd& x, int pieces, std::uint64_t seed);
// Half of the blocks (chosen by seed) are stretched by `stretch`, the rest squeezed by
// 1/stretch; the concatenation is linearly resampled back to x.size().
Eigen::VectorXd time_warp(const Eigen::VectorXd& x, int pieces, double stretch, std::uint64_t seed);

// Linear interpolation of x onto `length` evenly spaced points spanning the same
// first-to-last sample range. Endpoints are reproduced exactly.
Eigen::VectorXd linear_resize(const Eigen::Ref<const Eigen::VectorXd>& x, Eigen::Index length);

Eigen::VectorXd apply(TransformId id, const Eigen::VectorXd& x, const TransformParams& params,
                      std::uint64_t seed);

signal::EcgSegment apply(TransformId id, const signal::EcgSegment& seg, const TransformParams& params,
                         std::uint64_t seed);

// Seed for (segment index, transform) under params.rng_seed.
std::uint64_t sample_seed(std::uint64_t rng_seed, std::size_t segment_index, TransformId id);

// Every segment once per transform, segment-major order: samples[7*i + j] is segment i
// under transform j. Original passes through unchanged.
std::vector<PretextSample> build_pretext_dataset(std::span<const signal::EcgSegment> segments,
                                                 const TransformParams& params);

}  // namespace ecgssl::transforms
