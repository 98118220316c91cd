#include "ecgssl/signal.hpp"

#include "ecgssl/errors.hpp"
#include "ecgssl/random.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace ecgssl::signal {

namespace {

constexpr double kPi = std::numbers::pi;

void require_finite(const Eigen::VectorXd& x, const char* what) {
  if (!x.allFinite()) {
    throw ValidationError(std::string(what) + ": input contains non-finite samples");
  }
}

// Per-section state that holds a DF2T biquad at steady state for a unit input.
std::pair<double, double> unit_step_state(const Biquad& s) {
  const double gain = (s.b0 + s.b1 + s.b2) / (1.0 + s.a1 + s.a2);
  const double z2 = s.b2 - s.a2 * gain;
  const double z1 = s.b1 - s.a1 * gain + z2;
  return {z1, z2};
}

}  // namespace

void RawRecording::validate() const {
  if (samples.size() == 0) throw ValidationError("recording '" + subject_id + "' has no samples");
  require_finite(samples, "recording");
  if (!(sample_rate_hz > 0.0) || !std::isfinite(sample_rate_hz)) {
    throw ParameterError("recording '" + subject_id + "' has non-positive sample rate");
  }
  for (const auto& [name, score] : condition_labels) {
    if (!(score >= 1.0 && score <= 9.0)) {
      std::ostringstream msg;
      msg << "recording '" << subject_id << "': " << name << " score " << score
          << " outside [1, 9]";
      throw ValidationError(msg.str());
    }
  }
}

std::vector<Biquad> butterworth_highpass(int order, double cutoff_hz, double fs_hz) {
  if (order < 2 || order % 2 != 0) throw ParameterError("butterworth_highpass: order must be even and >= 2");
  if (!(cutoff_hz > 0.0) || !(fs_hz > 2.0 * cutoff_hz)) {
    throw ParameterError("butterworth_highpass: cutoff must lie in (0, fs/2)");
  }
  const double w0 = 2.0 * kPi * cutoff_hz / fs_hz;
  const double cosw = std::cos(w0);
  const double sinw = std::sin(w0);

  std::vector<Biquad> sections;
  sections.reserve(static_cast<std::size_t>(order / 2));
  for (int k = 0; k < order / 2; ++k) {
    // Pole pair k of the analog prototype sits at angle (2k+1)pi/(2N) from the imaginary axis.
    const double q = 1.0 / (2.0 * std::cos(kPi * (2.0 * k + 1.0) / (2.0 * order)));
    const double alpha = sinw / (2.0 * q);
    const double a0 = 1.0 + alpha;
    sections.push_back({(1.0 + cosw) / 2.0 / a0, -(1.0 + cosw) / a0, (1.0 + cosw) / 2.0 / a0,
                        -2.0 * cosw / a0, (1.0 - alpha) / a0});
  }
  return sections;
}

Eigen::VectorXd sos_filter(const std::vector<Biquad>& sections, const Eigen::VectorXd& x) {
  Eigen::VectorXd y = x;
  if (x.size() == 0) return y;
  for (const auto& s : sections) {
    auto [z1, z2] = unit_step_state(s);
    // y[0] here is already the upstream sections' steady-state response to x[0].
    const double level = y[0];
    z1 *= level;
    z2 *= level;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      const double in = y[i];
      const double out = s.b0 * in + z1;
      z1 = s.b1 * in - s.a1 * out + z2;
      z2 = s.b2 * in - s.a2 * out;
      y[i] = out;
    }
  }
  return y;
}

Eigen::VectorXd filtfilt(const std::vector<Biquad>& sections, const Eigen::VectorXd& x,
                         Eigen::Index padlen) {
  const Eigen::Index n = x.size();
  if (n == 0) return x;
  padlen = std::clamp<Eigen::Index>(padlen, 0, n - 1);

  Eigen::VectorXd ext(n + 2 * padlen);
  for (Eigen::Index i = 0; i < padlen; ++i) {
    ext[i] = 2.0 * x[0] - x[padlen - i];
    ext[padlen + n + i] = 2.0 * x[n - 1] - x[n - 2 - i];
  }
  ext.segment(padlen, n) = x;

  Eigen::VectorXd fwd = sos_filter(sections, ext);
  Eigen::VectorXd bwd = sos_filter(sections, fwd.reverse().eval());
  return bwd.reverse().segment(padlen, n);
}

Eigen::VectorXd highpass_baseline_filter(const Eigen::VectorXd& signal, double fs_hz) {
  if (!(fs_hz > 2.0 * kBaselineCutoffHz)) {
    throw ParameterError("highpass_baseline_filter: fs must exceed 1.6 Hz");
  }
  if (signal.size() < 64) throw ParameterError("highpass_baseline_filter: need at least 64 samples");
  require_finite(signal, "highpass_baseline_filter");
  const auto sections = butterworth_highpass(4, kBaselineCutoffHz, fs_hz);
  // Roughly three time constants of the slowest pole pair.
  const auto padlen = static_cast<Eigen::Index>(std::lround(3.0 * fs_hz / kBaselineCutoffHz));
  return filtfilt(sections, signal, padlen);
}

Eigen::VectorXd kaiser_lowpass(int taps, double cutoff, double beta) {
  if (taps < 1) throw ParameterError("kaiser_lowpass: taps must be positive");
  if (!(cutoff > 0.0 && cutoff < 0.5)) throw ParameterError("kaiser_lowpass: cutoff must be in (0, 0.5)");
  Eigen::VectorXd h(taps);
  const double center = 0.5 * (taps - 1);
  const double i0_beta = std::cyl_bessel_i(0.0, beta);
  for (int i = 0; i < taps; ++i) {
    const double t = i - center;
    const double sinc = t == 0.0 ? 2.0 * cutoff : std::sin(2.0 * kPi * cutoff * t) / (kPi * t);
    const double r = taps > 1 ? t / center : 0.0;
    const double window = std::cyl_bessel_i(0.0, beta * std::sqrt(std::max(0.0, 1.0 - r * r))) / i0_beta;
    h[i] = sinc * window;
  }
  h /= h.sum();
  return h;
}

Eigen::VectorXd resample(const Eigen::VectorXd& signal, double fs_in, double fs_out) {
  if (!(fs_in > 0.0) || !(fs_out > 0.0)) throw ParameterError("resample: rates must be positive");
  if (fs_out > fs_in) throw UnsupportedError("resample: upsampling is not supported");
  require_finite(signal, "resample");
  if (fs_out == fs_in) return signal;

  const double ratio = fs_in / fs_out;
  const auto factor = static_cast<Eigen::Index>(std::llround(ratio));
  if (std::abs(ratio - static_cast<double>(factor)) > 1e-9 * ratio) {
    throw UnsupportedError("resample: only integer decimation factors are supported");
  }

  // Pass band edge 0.4 fs_out, cutoff 0.45 fs_out, stop band from 0.5 fs_out; 80 dB Kaiser.
  const double cutoff = 0.45 / static_cast<double>(factor);
  const double transition = 0.1 / static_cast<double>(factor);  // cycles/sample, pass to stop edge
  constexpr double attenuation_db = 80.0;
  const double beta = 0.1102 * (attenuation_db - 8.7);
  int taps = static_cast<int>(std::ceil((attenuation_db - 7.95) / (2.285 * 2.0 * kPi * transition))) + 1;
  if (taps % 2 == 0) ++taps;
  const Eigen::VectorXd h = kaiser_lowpass(taps, cutoff, beta);
  const Eigen::Index half = taps / 2;

  const Eigen::Index n = signal.size();
  const auto out_len = static_cast<Eigen::Index>(std::llround(static_cast<double>(n) / ratio));

  // Odd extension keeps DC and linear trends intact at both ends.
  Eigen::VectorXd ext(n + 2 * half);
  for (Eigen::Index i = 0; i < half; ++i) {
    const Eigen::Index lead = std::min<Eigen::Index>(half - i, n - 1);
    const Eigen::Index tail = std::max<Eigen::Index>(n - 2 - i, 0);
    ext[i] = 2.0 * signal[0] - signal[lead];
    ext[half + n + i] = 2.0 * signal[n - 1] - signal[tail];
  }
  ext.segment(half, n) = signal;

  // Only every factor-th output of the FIR is evaluated.
  Eigen::VectorXd out(out_len);
  for (Eigen::Index m = 0; m < out_len; ++m) {
    out[m] = ext.segment(m * factor, taps).dot(h);
  }
  return out;
}

std::vector<EcgSegment> segment(const Eigen::VectorXd& signal, double fs_hz, double window_s,
                                const std::string& subject_id) {
  const double exact = fs_hz * window_s;
  const auto window = static_cast<Eigen::Index>(std::llround(exact));
  if (window <= 0 || std::abs(exact - static_cast<double>(window)) > 1e-9 * std::max(1.0, exact)) {
    throw ParameterError("segment: fs * window_s must be a positive integer");
  }
  std::vector<EcgSegment> out;
  const Eigen::Index count = signal.size() / window;
  out.reserve(static_cast<std::size_t>(count));
  for (Eigen::Index k = 0; k < count; ++k) {
    out.push_back({signal.segment(k * window, window), {subject_id, static_cast<int>(k)}});
  }
  return out;
}

Eigen::VectorXd synth_ecg(double heart_rate_bpm, double fs_hz, double duration_s, std::uint64_t seed) {
  if (!(heart_rate_bpm >= 30.0 && heart_rate_bpm <= 220.0)) {
    throw ParameterError("synth_ecg: heart rate must be within [30, 220] bpm");
  }
  if (!(fs_hz > 0.0)) throw ParameterError("synth_ecg: fs must be positive");
  if (!(duration_s > 0.0)) throw ParameterError("synth_ecg: duration must be positive");

  struct Wave {
    double offset_s;  // relative to the R peak at RR = 1 s
    double width_s;
    double amplitude;
  };
  static constexpr Wave kWaves[] = {
      {-0.20, 0.025, 0.12},   // P
      {-0.035, 0.010, -0.15},  // Q
      {0.0, 0.012, 1.00},     // R
      {0.035, 0.010, -0.25},  // S
      {0.30, 0.045, 0.30},    // T
  };

  const auto n = static_cast<Eigen::Index>(std::llround(fs_hz * duration_s));
  if (n <= 0) throw ParameterError("synth_ecg: duration shorter than one sample");
  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  CounterRng rng(seed);
  const double mean_rr = 60.0 / heart_rate_bpm;
  const double end_s = static_cast<double>(n) / fs_hz;

  // First R peak lands at a random phase within the first beat.
  double r_time = rng.uniform() * mean_rr;
  // Start one beat early so the T wave of a preceding beat is present.
  r_time -= mean_rr;
  while (r_time < end_s + 0.5) {
    const double rr = mean_rr * std::clamp(1.0 + 0.02 * rng.normal(), 0.9, 1.1);
    const double scale = std::sqrt(rr);
    for (const auto& w : kWaves) {
      const double amp = w.amplitude * (1.0 + 0.03 * rng.normal());
      const double center = r_time + w.offset_s * scale;
      const double width = w.width_s * scale;
      const auto lo = std::max<Eigen::Index>(0, static_cast<Eigen::Index>(std::floor((center - 5.0 * width) * fs_hz)));
      const auto hi = std::min<Eigen::Index>(n - 1, static_cast<Eigen::Index>(std::ceil((center + 5.0 * width) * fs_hz)));
      for (Eigen::Index i = lo; i <= hi; ++i) {
        const double d = (static_cast<double>(i) / fs_hz - center) / width;
        x[i] += amp * std::exp(-0.5 * d * d);
      }
    }
    r_time += rr;
  }
  x.array() -= x.mean();
  return x;
}

Eigen::VectorXd preprocess(const RawRecording& recording) {
  recording.validate();
  Eigen::VectorXd x = recording.sample_rate_hz == kModelRateHz
                          ? recording.samples
                          : resample(recording.samples, recording.sample_rate_hz, kModelRateHz);
  return highpass_baseline_filter(x, kModelRateHz);
}

}  // namespace ecgssl::signal
