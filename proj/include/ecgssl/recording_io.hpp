#pragma once

#include "ecgssl/signal.hpp"

#include <filesystem>
#include <iosfwd>
#include <vector>

namespace ecgssl::io {

// Recording CSV layout
//
//   subject,condition,score_arousal,score_valence,score_stress,sample_rate_hz
//   S01,baseline,3.5,6,,2048
//   0.0123
//   -0.0456
//   ...
//
// Line 1 is the fixed header, line 2 the metadata row (empty score = target absent),
// every following non-empty line holds one amplitude.
signal::RawRecording read_recording_csv(std::istream& in, const std::string& origin = "<stream>");
signal::RawRecording read_recording_csv(const std::filesystem::path& path);
void write_recording_csv(std::ostream& out, const signal::RawRecording& recording);

// Manifest layout (manifest.csv next to the binaries)
//
//   file,subject,condition,score_arousal,score_valence,score_stress,sample_rate_hz
//   S01.f32,S01,low_hr,3.1,6.9,2.8,256
//
// `file` is relative to the manifest's directory and holds raw little-endian IEEE-754
// float32 samples with no header; the sample count is file size / 4.
std::vector<signal::RawRecording> read_manifest(const std::filesystem::path& manifest_path);
void write_dataset(const std::filesystem::path& dir, const std::vector<signal::RawRecording>& recordings);

void write_f32le(const std::filesystem::path& path, const Eigen::VectorXd& samples);
Eigen::VectorXd read_f32le(const std::filesystem::path& path);

// Accepts a manifest file, a directory containing manifest.csv, a single recording
// CSV, or a directory of recording CSVs (read in lexicographic order).
std::vector<signal::RawRecording> load_recordings(const std::filesystem::path& path);

}  // namespace ecgssl::io
