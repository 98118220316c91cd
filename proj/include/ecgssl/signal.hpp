#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace ecgssl::signal {

inline constexpr double kModelRateHz = 256.0;
inline constexpr double kWindowSeconds = 10.0;
inline constexpr Eigen::Index kWindowLength = 2560;
inline constexpr double kBaselineCutoffHz = 0.8;

// One raw ECG recording before preprocessing. Affect scores live on the 1..9
// self-assessment scale and are keyed by target name ("arousal", "valence", "stress").
struct RawRecording {
  Eigen::VectorXd samples;
  double sample_rate_hz = 0.0;
  std::string subject_id;
  std::string condition;
  std::map<std::string, double> condition_labels;

  // Throws ValidationError on empty/non-finite samples or out-of-range scores,
  // ParameterError on a non-positive sample rate.
  void validate() const;
};

struct SegmentSource {
  std::string subject_id;
  int segment_index = 0;

  auto operator<=>(const SegmentSource&) const = default;
};

struct EcgSegment {
  Eigen::VectorXd samples;
  SegmentSource source;
};

// Second-order section in direct form II transposed, a0 normalized to 1.
struct Biquad {
  double b0, b1, b2, a1, a2;
};

// Digital Butterworth high-pass (bilinear transform, prewarped cutoff) as a cascade
// of order/2 biquads. Order must be even.
std::vector<Biquad> butterworth_highpass(int order, double cutoff_hz, double fs_hz);

// Single forward pass. Initial state is the steady state for a constant input equal
// to x[0] (as scipy's sosfilt_zi * x[0]).
Eigen::VectorXd sos_filter(const std::vector<Biquad>& sections, const Eigen::VectorXd& x);

// Zero-phase forward-backward filtering with odd-extension padding of `padlen`
// samples at each end (clamped to size - 1).
Eigen::VectorXd filtfilt(const std::vector<Biquad>& sections, const Eigen::VectorXd& x,
                         Eigen::Index padlen);

// Baseline-wander removal: order-4 Butterworth high-pass at 0.8 Hz, applied
// forward-backward. Requires fs > 1.6 Hz and at least 64 samples.
Eigen::VectorXd highpass_baseline_filter(const Eigen::VectorXd& signal, double fs_hz);

// Symmetric Kaiser-windowed sinc low-pass, taps normalized to unit DC gain.
// `cutoff` is in cycles/sample (0 < cutoff < 0.5).
Eigen::VectorXd kaiser_lowpass(int taps, double cutoff, double beta);

// Integer-factor polyphase decimation. Output length is round(n * fs_out / fs_in).
// The anti-alias filter cuts off at 0.45 * fs_out and keeps content below
// 0.4 * fs_out within 2%. Equal rates return a copy; fs_out > fs_in throws
// UnsupportedError, as does a non-integer ratio.
Eigen::VectorXd resample(const Eigen::VectorXd& signal, double fs_in, double fs_out);

// Non-overlapping consecutive windows of fs * window_s samples; the trailing partial
// window is dropped. Too-short input gives an empty list.
std::vector<EcgSegment> segment(const Eigen::VectorXd& signal, double fs_hz,
                                double window_s = kWindowSeconds,
                                const std::string& subject_id = {});

// Gaussian-wave synthetic ECG: five bumps (P, Q, R, S, T) per beat whose offsets and
// widths scale with sqrt(RR), seeded RR jitter (2% std) and per-beat amplitude
// jitter (3% std). The sample mean is removed. 30 <= bpm <= 220.
Eigen::VectorXd synth_ecg(double heart_rate_bpm, double fs_hz, double duration_s,
                          std::uint64_t seed);

// Resample to 256 Hz (when needed), then baseline-filter.
Eigen::VectorXd preprocess(const RawRecording& recording);

}  // namespace ecgssl::signal
