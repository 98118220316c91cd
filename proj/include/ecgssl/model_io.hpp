#pragma once

#include "ecgssl/models.hpp"

#include <filesystem>
#include <iosfwd>

namespace ecgssl::models {

inline constexpr std::uint32_t kModelFormatVersion = 1;

// Container layout, all integers little-endian:
//
//   bytes 0..7    magic "ECGSSLM\0"
//   bytes 8..11   u32 format version
//   bytes 12..15  u32 manifest length N
//   next N bytes  UTF-8 JSON manifest:
//                   {"architecture": "pretext" | "emotion",
//                    "format_version": 1,
//                    "spec": {...ArchitectureSpec...},
//                    "arrays": [{"name", "shape", "trainable", "regularized",
//                                "offset", "count"}, ...]}
//   remainder     float32 payload; array k occupies [offset, offset + count) floats
//
// Files written by a newer format version are rejected.
void save_model(std::ostream& out, const PretextNetwork<float>& net);
void save_model(std::ostream& out, const EmotionNetwork<float>& net);
void save_model(const std::filesystem::path& path, const PretextNetwork<float>& net);
void save_model(const std::filesystem::path& path, const EmotionNetwork<float>& net);

PretextNetwork<float> load_pretext_model(std::istream& in);
EmotionNetwork<float> load_emotion_model(std::istream& in);
PretextNetwork<float> load_pretext_model(const std::filesystem::path& path);
EmotionNetwork<float> load_emotion_model(const std::filesystem::path& path);

}  // namespace ecgssl::models
