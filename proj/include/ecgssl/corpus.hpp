#pragma once

#include "ecgssl/signal.hpp"
#include "ecgssl/training.hpp"

#include <cstdint>
#include <vector>

namespace ecgssl::corpus {

// Two heart-rate populations with affect scores tied to the population: recording i
// belongs to the low-HR group when i is even, the high-HR group when odd.
struct SynthOptions {
  int count = 20;
  double low_hr_min = 55.0;
  double low_hr_max = 65.0;
  double high_hr_min = 95.0;
  double high_hr_max = 105.0;
  double sample_rate_hz = 256.0;
  double duration_s = 60.0;
  std::uint64_t seed = 1;

  void validate() const;
};

// Low group: arousal and stress in [2, 4], valence in [6, 8]; high group mirrored.
std::vector<signal::RawRecording> synthesize_recordings(const SynthOptions& options);

// Preprocess (resample to 256 Hz, baseline filter) and cut 10 s windows. Segment
// indices continue across recordings of the same subject.
training::LabeledCorpus build_corpus(const std::vector<signal::RawRecording>& recordings);

}  // namespace ecgssl::corpus
