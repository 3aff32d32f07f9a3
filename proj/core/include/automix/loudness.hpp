#pragma once

#include <cstddef>
#include <limits>
#include <stdexcept>

#include "automix/audio_io.hpp"
#include "automix/biquad.hpp"

namespace automix::loudness {

/// Reading for silence (every block below the absolute gate).
inline constexpr double kSilenceLufs = -std::numeric_limits<double>::infinity();

inline constexpr double kBlockSeconds = 0.4;
inline constexpr double kStepSeconds = 0.1;  // 75% block overlap
inline constexpr double kAbsoluteGateLufs = -70.0;
inline constexpr double kRelativeGateLu = -10.0;

struct LoudnessReading {
  double integrated_lufs = kSilenceLufs;
  std::size_t gated_block_count = 0;
  double ungated_lufs = kSilenceLufs;

  bool silent() const { return integrated_lufs == kSilenceLufs; }
};

class LoudnessError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The two K-weighting stages (high shelf, then RLB high-pass) for `fs`,
/// obtained by bilinear transform of the analog prototype.
struct KWeightingFilter {
  Biquad shelf;
  Biquad highpass;
};

KWeightingFilter design_k_weighting(int sample_rate);

AudioClip k_weight(const AudioClip& clip);

/// Gated integrated loudness. Throws LoudnessError for clips shorter than one
/// 400 ms block.
LoudnessReading integrated_loudness(const AudioClip& clip);

struct Normalized {
  AudioClip clip;
  double applied_gain_db = 0.0;
};

/// Single static gain to `target_lufs`. Throws LoudnessError on silence.
Normalized normalize_to(const AudioClip& clip, double target_lufs);

double db_to_gain(double db);

}  // namespace automix::loudness
