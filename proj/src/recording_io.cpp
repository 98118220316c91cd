#include "ecgssl/recording_io.hpp"

#include "ecgssl/errors.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace ecgssl::io {

namespace {

constexpr std::array<const char*, 3> kTargets = {"arousal", "valence", "stress"};
constexpr const char* kRecordingHeader = "subject,condition,score_arousal,score_valence,score_stress,sample_rate_hz";
constexpr const char* kManifestHeader =
    "file,subject,condition,score_arousal,score_valence,score_stress,sample_rate_hz";

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_number(const std::string& text, const std::string& origin, std::size_t line) {
  double value = 0.0;
  const char* begin = text.data();
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end) {
    throw FormatError(origin + ":" + std::to_string(line) + ": expected a number, got '" + text + "'");
  }
  return value;
}

std::string format_number(double v) {
  std::ostringstream ss;
  ss << std::setprecision(17) << v;
  return ss.str();
}

// Fills subject/condition/scores/rate from the metadata fields starting at `first`.
void apply_metadata(signal::RawRecording& rec, const std::vector<std::string>& fields, std::size_t first,
                    const std::string& origin, std::size_t line) {
  rec.subject_id = fields[first];
  rec.condition = fields[first + 1];
  for (std::size_t t = 0; t < kTargets.size(); ++t) {
    const auto& text = fields[first + 2 + t];
    if (!text.empty()) rec.condition_labels[kTargets[t]] = parse_number(text, origin, line);
  }
  rec.sample_rate_hz = parse_number(fields[first + 5], origin, line);
}

void write_metadata(std::ostream& out, const signal::RawRecording& rec) {
  out << rec.subject_id << ',' << rec.condition;
  for (const char* target : kTargets) {
    out << ',';
    if (auto it = rec.condition_labels.find(target); it != rec.condition_labels.end()) {
      out << format_number(it->second);
    }
  }
  out << ',' << format_number(rec.sample_rate_hz);
}

}  // namespace

signal::RawRecording read_recording_csv(std::istream& in, const std::string& origin) {
  std::string line;
  if (!std::getline(in, line) || trim(line) != kRecordingHeader) {
    throw FormatError(origin + ": missing recording header '" + std::string(kRecordingHeader) + "'");
  }
  if (!std::getline(in, line)) throw FormatError(origin + ": missing metadata row");
  const auto fields = split_csv(trim(line));
  if (fields.size() != 6) throw FormatError(origin + ":2: metadata row needs 6 fields");

  signal::RawRecording rec;
  apply_metadata(rec, fields, 0, origin, 2);

  std::vector<double> samples;
  std::size_t line_no = 2;
  while (std::getline(in, line)) {
    ++line_no;
    const auto text = trim(line);
    if (text.empty()) continue;
    samples.push_back(parse_number(text, origin, line_no));
  }
  rec.samples = Eigen::Map<const Eigen::VectorXd>(samples.data(), static_cast<Eigen::Index>(samples.size()));
  rec.validate();
  return rec;
}

signal::RawRecording read_recording_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open recording " + path.string());
  return read_recording_csv(in, path.string());
}

void write_recording_csv(std::ostream& out, const signal::RawRecording& recording) {
  out << kRecordingHeader << '\n';
  write_metadata(out, recording);
  out << '\n';
  for (Eigen::Index i = 0; i < recording.samples.size(); ++i) out << format_number(recording.samples[i]) << '\n';
}

void write_f32le(const std::filesystem::path& path, const Eigen::VectorXd& samples) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write " + path.string());
  for (Eigen::Index i = 0; i < samples.size(); ++i) {
    auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(samples[i]));
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap32(bits);
    out.write(reinterpret_cast<const char*>(&bits), sizeof bits);
  }
}

Eigen::VectorXd read_f32le(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() % 4 != 0) throw FormatError(path.string() + ": size is not a multiple of 4 bytes");
  Eigen::VectorXd out(static_cast<Eigen::Index>(bytes.size() / 4));
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    std::uint32_t bits;
    std::memcpy(&bits, bytes.data() + 4 * i, sizeof bits);
    if constexpr (std::endian::native == std::endian::big) bits = __builtin_bswap32(bits);
    out[i] = static_cast<double>(std::bit_cast<float>(bits));
  }
  return out;
}

std::vector<signal::RawRecording> read_manifest(const std::filesystem::path& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) throw FormatError("cannot open manifest " + manifest_path.string());
  const std::string origin = manifest_path.string();
  std::string line;
  if (!std::getline(in, line) || trim(line) != kManifestHeader) {
    throw FormatError(origin + ": missing manifest header '" + std::string(kManifestHeader) + "'");
  }
  std::vector<signal::RawRecording> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    const auto text = trim(line);
    if (text.empty()) continue;
    const auto fields = split_csv(text);
    if (fields.size() != 7) throw FormatError(origin + ":" + std::to_string(line_no) + ": expected 7 fields");
    signal::RawRecording rec;
    apply_metadata(rec, fields, 1, origin, line_no);
    rec.samples = read_f32le(manifest_path.parent_path() / fields[0]);
    rec.validate();
    out.push_back(std::move(rec));
  }
  return out;
}

void write_dataset(const std::filesystem::path& dir, const std::vector<signal::RawRecording>& recordings) {
  std::filesystem::create_directories(dir);
  std::ofstream manifest(dir / "manifest.csv");
  if (!manifest) throw FormatError("cannot write manifest in " + dir.string());
  manifest << kManifestHeader << '\n';
  for (std::size_t i = 0; i < recordings.size(); ++i) {
    const auto& rec = recordings[i];
    const std::string file = rec.subject_id + "_" + std::to_string(i) + ".f32";
    write_f32le(dir / file, rec.samples);
    manifest << file << ',';
    write_metadata(manifest, rec);
    manifest << '\n';
  }
}

std::vector<signal::RawRecording> load_recordings(const std::filesystem::path& path) {
  namespace fs = std::filesystem;
  if (fs::is_directory(path)) {
    if (fs::exists(path / "manifest.csv")) return read_manifest(path / "manifest.csv");
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(path)) {
      if (entry.is_regular_file() && entry.path().extension() == ".csv") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw FormatError(path.string() + ": no manifest.csv or recording CSVs found");
    std::vector<signal::RawRecording> out;
    for (const auto& f : files) out.push_back(read_recording_csv(f));
    return out;
  }
  if (!fs::exists(path)) throw FormatError("data path does not exist: " + path.string());
  std::ifstream in(path);
  std::string first;
  std::getline(in, first);
  if (trim(first) == kManifestHeader) return read_manifest(path);
  return {read_recording_csv(path)};
}

}  // namespace ecgssl::io
