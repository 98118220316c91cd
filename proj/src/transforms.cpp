#include "ecgssl/transforms.hpp"

#include "ecgssl/errors.hpp"
#include "ecgssl/random.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace ecgssl::transforms {

namespace {

constexpr std::array<std::string_view, kTransformCount> kNames = {
    "original", "noise", "scale", "negate", "hflip", "permute", "time_warp"};

void require_divisible(Eigen::Index length, int pieces, const char* what) {
  if (length % pieces != 0) {
    throw ParameterError(std::string(what) + ": length " + std::to_string(length) +
                         " is not divisible by " + std::to_string(pieces) + " pieces");
  }
}

}  // namespace

std::string_view name(TransformId id) { return kNames.at(static_cast<std::size_t>(id)); }

std::optional<TransformId> transform_from_name(std::string_view text) {
  for (int i = 0; i < kTransformCount; ++i) {
    if (kNames[i] == text) return static_cast<TransformId>(i);
  }
  return std::nullopt;
}

void TransformParams::validate() const {
  if (!(noise_sigma_rel > 0.0)) throw ParameterError("noise_sigma_rel must be > 0");
  if (!(scale_factor > 0.0) || scale_factor == 1.0) throw ParameterError("scale_factor must be > 0 and != 1");
  if (permute_pieces < 2) throw ParameterError("permute_pieces must be >= 2");
  if (warp_pieces < 2 || warp_pieces % 2 != 0) throw ParameterError("warp_pieces must be even and >= 2");
  if (!(warp_stretch > 1.0)) throw ParameterError("warp_stretch must be > 1");
}

Eigen::VectorXd add_noise(const Eigen::VectorXd& x, double sigma_rel, std::uint64_t seed) {
  if (!(sigma_rel > 0.0)) throw ParameterError("add_noise: sigma_rel must be > 0");
  const double mean = x.size() > 0 ? x.mean() : 0.0;
  const double var = x.size() > 0 ? (x.array() - mean).square().mean() : 0.0;
  const double sigma = var > 0.0 ? sigma_rel * std::sqrt(var) : sigma_rel;
  CounterRng rng(seed);
  Eigen::VectorXd out = x;
  for (Eigen::Index i = 0; i < out.size(); ++i) out[i] += sigma * rng.normal();
  return out;
}

Eigen::VectorXd scale(const Eigen::VectorXd& x, double factor) {
  if (!(factor > 0.0)) throw ParameterError("scale: factor must be > 0");
  return factor * x;
}

Eigen::VectorXd negate(const Eigen::VectorXd& x) { return -x; }

Eigen::VectorXd hflip(const Eigen::VectorXd& x) { return x.reverse(); }

Eigen::VectorXd permute(const Eigen::VectorXd& x, int pieces, std::uint64_t seed) {
  if (pieces < 2) throw ParameterError("permute: pieces must be >= 2");
  require_divisible(x.size(), pieces, "permute");
  const Eigen::Index block = x.size() / pieces;

  std::vector<int> order(static_cast<std::size_t>(pieces));
  std::iota(order.begin(), order.end(), 0);
  CounterRng rng(seed);
  const auto identity = order;
  do {
    rng.shuffle(order.begin(), order.end());
  } while (order == identity);

  Eigen::VectorXd out(x.size());
  for (int k = 0; k < pieces; ++k) out.segment(k * block, block) = x.segment(order[k] * block, block);
  return out;
}

Eigen::VectorXd linear_resize(const Eigen::Ref<const Eigen::VectorXd>& x, Eigen::Index length) {
  if (x.size() == 0 || length <= 0) throw ParameterError("linear_resize: empty input or output");
  Eigen::VectorXd out(length);
  if (x.size() == 1 || length == 1) {
    out.setConstant(x[0]);
    return out;
  }
  const double step = static_cast<double>(x.size() - 1) / static_cast<double>(length - 1);
  for (Eigen::Index i = 0; i < length; ++i) {
    const double pos = static_cast<double>(i) * step;
    auto lo = static_cast<Eigen::Index>(std::floor(pos));
    if (lo >= x.size() - 1) {
      out[i] = x[x.size() - 1];
      continue;
    }
    const double frac = pos - static_cast<double>(lo);
    out[i] = x[lo] + frac * (x[lo + 1] - x[lo]);
  }
  return out;
}

Eigen::VectorXd time_warp(const Eigen::VectorXd& x, int pieces, double stretch, std::uint64_t seed) {
  if (pieces < 2 || pieces % 2 != 0) throw ParameterError("time_warp: pieces must be even and >= 2");
  if (!(stretch > 1.0)) throw ParameterError("time_warp: stretch must be > 1");
  require_divisible(x.size(), pieces, "time_warp");
  const Eigen::Index block = x.size() / pieces;

  std::vector<int> order(static_cast<std::size_t>(pieces));
  std::iota(order.begin(), order.end(), 0);
  CounterRng rng(seed);
  rng.shuffle(order.begin(), order.end());
  std::vector<bool> stretched(static_cast<std::size_t>(pieces), false);
  for (int k = 0; k < pieces / 2; ++k) stretched[static_cast<std::size_t>(order[k])] = true;

  const auto long_len = std::max<Eigen::Index>(2, std::llround(static_cast<double>(block) * stretch));
  const auto short_len = std::max<Eigen::Index>(2, std::llround(static_cast<double>(block) / stretch));

  std::vector<double> warped;
  warped.reserve(static_cast<std::size_t>(pieces / 2 * (long_len + short_len)));
  for (int k = 0; k < pieces; ++k) {
    const auto piece = linear_resize(x.segment(k * block, block),
                                     stretched[static_cast<std::size_t>(k)] ? long_len : short_len);
    warped.insert(warped.end(), piece.data(), piece.data() + piece.size());
  }
  return linear_resize(Eigen::Map<const Eigen::VectorXd>(warped.data(), static_cast<Eigen::Index>(warped.size())),
                       x.size());
}

Eigen::VectorXd apply(TransformId id, const Eigen::VectorXd& x, const TransformParams& params, std::uint64_t seed) {
  switch (id) {
    case TransformId::Original: return x;
    case TransformId::Noise: return add_noise(x, params.noise_sigma_rel, seed);
    case TransformId::Scale: return scale(x, params.scale_factor);
    case TransformId::Negate: return negate(x);
    case TransformId::HFlip: return hflip(x);
    case TransformId::Permute: return permute(x, params.permute_pieces, seed);
    case TransformId::TimeWarp: return time_warp(x, params.warp_pieces, params.warp_stretch, seed);
  }
  throw ParameterError("unknown transform id");
}

signal::EcgSegment apply(TransformId id, const signal::EcgSegment& seg, const TransformParams& params,
                         std::uint64_t seed) {
  return {apply(id, seg.samples, params, seed), seg.source};
}

std::uint64_t sample_seed(std::uint64_t rng_seed, std::size_t segment_index, TransformId id) {
  return CounterRng(rng_seed).split({segment_index, static_cast<std::uint64_t>(id)}).key();
}

std::vector<PretextSample> build_pretext_dataset(std::span<const signal::EcgSegment> segments,
                                                 const TransformParams& params) {
  if (segments.empty()) throw ParameterError("build_pretext_dataset: no segments");
  params.validate();
  std::vector<PretextSample> out;
  out.reserve(segments.size() * kTransformCount);
  for (std::size_t i = 0; i < segments.size(); ++i) {
    for (auto id : kAllTransforms) {
      out.push_back({apply(id, segments[i], params, sample_seed(params.rng_seed, i, id)), id});
    }
  }
  return out;
}

}  // namespace ecgssl::transforms
