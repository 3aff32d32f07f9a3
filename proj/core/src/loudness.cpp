#include "automix/loudness.hpp"

#include <cmath>
#include <numbers>
#include <vector>

namespace automix::loudness {

namespace {

// Analog prototype of the K-weighting pre-filter and RLB high-pass. The
// standard only tabulates 48 kHz coefficients; these parameters reproduce that
// table and let us design for any rate.
constexpr double kShelfHz = 1681.974450955533;
constexpr double kShelfGainDb = 3.999843853973347;
constexpr double kShelfQ = 0.7071752369554196;
constexpr double kShelfBandExponent = 0.4996667741545416;
constexpr double kHighpassHz = 38.13547087602444;
constexpr double kHighpassQ = 0.5003270373238773;

constexpr double kLoudnessOffset = -0.691;

double power_to_lufs(double power) {
  return power > 0.0 ? kLoudnessOffset + 10.0 * std::log10(power)
                     : kSilenceLufs;
}

double lufs_to_power(double lufs) {
  return std::pow(10.0, (lufs - kLoudnessOffset) / 10.0);
}

}  // namespace

double db_to_gain(double db) { return std::pow(10.0, db / 20.0); }

KWeightingFilter design_k_weighting(int sample_rate) {
  if (!is_supported_sample_rate(sample_rate)) {
    throw LoudnessError("k-weighting: unsupported sample rate " +
                        std::to_string(sample_rate));
  }
  const double fs = sample_rate;
  KWeightingFilter k;

  {
    const double kk = std::tan(std::numbers::pi * kShelfHz / fs);
    const double vh = std::pow(10.0, kShelfGainDb / 20.0);
    const double vb = std::pow(vh, kShelfBandExponent);
    const double a0 = 1.0 + kk / kShelfQ + kk * kk;
    k.shelf.b0 = (vh + vb * kk / kShelfQ + kk * kk) / a0;
    k.shelf.b1 = 2.0 * (kk * kk - vh) / a0;
    k.shelf.b2 = (vh - vb * kk / kShelfQ + kk * kk) / a0;
    k.shelf.a1 = 2.0 * (kk * kk - 1.0) / a0;
    k.shelf.a2 = (1.0 - kk / kShelfQ + kk * kk) / a0;
  }
  {
    const double kk = std::tan(std::numbers::pi * kHighpassHz / fs);
    const double a0 = 1.0 + kk / kHighpassQ + kk * kk;
    k.highpass.b0 = 1.0;
    k.highpass.b1 = -2.0;
    k.highpass.b2 = 1.0;
    k.highpass.a1 = 2.0 * (kk * kk - 1.0) / a0;
    k.highpass.a2 = (1.0 - kk / kHighpassQ + kk * kk) / a0;
  }
  return k;
}

AudioClip k_weight(const AudioClip& clip) {
  const KWeightingFilter k = design_k_weighting(clip.sample_rate());
  std::vector<double> y(clip.samples().begin(), clip.samples().end());
  filter_in_place(k.shelf, y);
  filter_in_place(k.highpass, y);
  return AudioClip(clip.sample_rate(), std::move(y));
}

LoudnessReading integrated_loudness(const AudioClip& clip) {
  const auto block =
      static_cast<std::size_t>(std::lround(kBlockSeconds * clip.sample_rate()));
  const auto step =
      static_cast<std::size_t>(std::lround(kStepSeconds * clip.sample_rate()));
  if (clip.length() < block) {
    throw LoudnessError("clip shorter than one 400 ms gating block");
  }

  const AudioClip weighted = k_weight(clip);
  const auto z = weighted.samples();

  // Prefix sums of z^2 so each block power is O(1).
  std::vector<double> prefix(z.size() + 1, 0.0);
  for (std::size_t i = 0; i < z.size(); ++i) {
    prefix[i + 1] = prefix[i] + z[i] * z[i];
  }
  const std::size_t n_blocks = (z.size() - block) / step + 1;
  std::vector<double> powers(n_blocks);
  for (std::size_t j = 0; j < n_blocks; ++j) {
    const std::size_t start = j * step;
    powers[j] = (prefix[start + block] - prefix[start]) / block;
  }

  LoudnessReading reading;
  double sum_all = 0.0;
  for (double p : powers) sum_all += p;
  reading.ungated_lufs = power_to_lufs(sum_all / n_blocks);

  const double abs_gate_power = lufs_to_power(kAbsoluteGateLufs);
  double sum_abs = 0.0;
  std::size_t n_abs = 0;
  for (double p : powers) {
    if (p > abs_gate_power) {
      sum_abs += p;
      ++n_abs;
    }
  }
  if (n_abs == 0) return reading;

  const double rel_gate_power =
      lufs_to_power(power_to_lufs(sum_abs / n_abs) + kRelativeGateLu);
  const double gate = std::max(abs_gate_power, rel_gate_power);
  double sum_rel = 0.0;
  std::size_t n_rel = 0;
  for (double p : powers) {
    if (p > gate) {
      sum_rel += p;
      ++n_rel;
    }
  }
  if (n_rel == 0) return reading;
  reading.integrated_lufs = power_to_lufs(sum_rel / n_rel);
  reading.gated_block_count = n_rel;
  return reading;
}

Normalized normalize_to(const AudioClip& clip, double target_lufs) {
  const LoudnessReading reading = integrated_loudness(clip);
  if (reading.silent()) {
    throw LoudnessError("cannot normalize silence");
  }
  const double gain_db = target_lufs - reading.integrated_lufs;
  return {clip.scaled(db_to_gain(gain_db)), gain_db};
}

}  // namespace automix::loudness
