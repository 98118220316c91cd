#include "ecgssl/corpus.hpp"

#include "ecgssl/errors.hpp"
#include "ecgssl/random.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <map>

namespace ecgssl::corpus {

namespace {
const std::vector<std::string> kTargets = {"arousal", "valence", "stress"};
}

void SynthOptions::validate() const {
  if (count < 1) throw ParameterError("synth: count must be >= 1");
  if (!(low_hr_min <= low_hr_max) || !(high_hr_min <= high_hr_max)) throw ParameterError("synth: empty HR range");
  for (double hr : {low_hr_min, low_hr_max, high_hr_min, high_hr_max}) {
    if (!(hr >= 30.0 && hr <= 220.0)) throw ParameterError("synth: heart rates must lie in [30, 220] bpm");
  }
  if (!(sample_rate_hz > 0.0)) throw ParameterError("synth: sample rate must be positive");
  if (!(duration_s > 0.0)) throw ParameterError("synth: duration must be positive");
}

std::vector<signal::RawRecording> synthesize_recordings(const SynthOptions& options) {
  options.validate();
  std::vector<signal::RawRecording> out;
  const CounterRng root(options.seed);
  for (int i = 0; i < options.count; ++i) {
    CounterRng rng = root.split(static_cast<std::uint64_t>(i));
    const bool high = i % 2 == 1;
    const double hr = high ? rng.uniform(options.high_hr_min, options.high_hr_max)
                           : rng.uniform(options.low_hr_min, options.low_hr_max);
    const double low_band = rng.uniform(2.0, 4.0);
    const double high_band = rng.uniform(6.0, 8.0);
    const double stress = high ? rng.uniform(6.0, 8.0) : rng.uniform(2.0, 4.0);

    signal::RawRecording rec;
    char id[32];
    std::snprintf(id, sizeof id, "S%03d", i + 1);
    rec.subject_id = id;
    rec.condition = high ? "high_hr" : "low_hr";
    rec.sample_rate_hz = options.sample_rate_hz;
    rec.samples = signal::synth_ecg(hr, options.sample_rate_hz, options.duration_s, rng.next_u64());
    rec.condition_labels["arousal"] = high ? high_band : low_band;
    rec.condition_labels["valence"] = high ? low_band : high_band;
    rec.condition_labels["stress"] = stress;
    out.push_back(std::move(rec));
  }
  return out;
}

training::LabeledCorpus build_corpus(const std::vector<signal::RawRecording>& recordings) {
  training::LabeledCorpus corpus;
  corpus.targets = kTargets;
  corpus.scores.assign(kTargets.size(), {});
  std::map<std::string, int> next_index;
  for (const auto& rec : recordings) {
    const auto filtered = signal::preprocess(rec);
    auto segments = signal::segment(filtered, signal::kModelRateHz, signal::kWindowSeconds, rec.subject_id);
    int& base = next_index[rec.subject_id];
    for (auto& s : segments) {
      s.source.segment_index += base;
      for (std::size_t t = 0; t < kTargets.size(); ++t) {
        const auto it = rec.condition_labels.find(kTargets[t]);
        corpus.scores[t].push_back(it == rec.condition_labels.end() ? std::numeric_limits<double>::quiet_NaN()
                                                                    : it->second);
      }
      corpus.segments.push_back(std::move(s));
    }
    base += static_cast<int>(segments.size());
  }
  return corpus;
}

}  // namespace ecgssl::corpus
