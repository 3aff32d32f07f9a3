#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "automix/audio_io.hpp"
#include "automix/psycho_model.hpp"

namespace automix::metric {

/// Per-frame values over scale-factor bands: [frame][band].
using BandFrames = std::vector<std::vector<double>>;

struct MetricConfig {
  /// Maximum masking distance per band, dB.
  double t_max_db = 20.0;
  /// Frames whose track RMS is at or below this level are ignored.
  double activity_gate_db = -70.0;
  /// Absolute floor on maskee band energy; the band's threshold in quiet
  /// also acts as a floor (see track_masking).
  double energy_floor = 1e-12;

  friend bool operator==(const MetricConfig&, const MetricConfig&) = default;
};

struct MaskingResult {
  std::vector<double> per_track_m;
  double m_total = 0.0;  // sum of squares
  double m_diff = 0.0;   // largest pairwise difference
  double objective = 0.0;
  std::vector<std::size_t> active_frame_counts;

  /// Builds the totals from per-track values.
  static MaskingResult from_track_values(std::vector<double> m,
                                         std::vector<std::size_t> active = {});
};

struct TrackMasking {
  double m = 0.0;
  std::size_t active_frames = 0;
};

/// Frame levels, 10 log10 of the mean square (full-scale sine = -3 dB), one
/// per frame of frame_signal(clip, frame_len, hop).
std::vector<double> frame_levels_db(const AudioClip& clip, std::size_t frame_len,
                                    std::size_t hop);

/// Masking thresholds of track `n` caused by the sum of all other tracks
/// (total mix minus track n). With a single track the accompaniment is
/// silence.
BandFrames cross_threshold(std::size_t n, std::span<const AudioClip> clips,
                           const psycho::PsychoModel& model);

/// M_n: mean over active frames of sum_sb clamp(MSR, 0, t_max) / t_max for
/// bands where the cross threshold exceeds the maskee energy and the energy
/// is above max(energy_floor, quiet_floor[sb]).
TrackMasking track_masking(const BandFrames& esb, const BandFrames& tprime,
                           std::span<const double> frame_levels_db,
                           std::span<const double> quiet_floor,
                           const MetricConfig& cfg);

/// Spectral-domain evaluator used inside optimisation loops. Spectra of every
/// track are computed once per call; each accompaniment spectrum is the total
/// minus the track, which equals analysing the time-domain complement.
class MaskingEvaluator {
 public:
  MaskingEvaluator(psycho::PsychoModel model, MetricConfig cfg);

  MaskingResult evaluate(std::span<const AudioClip> clips) const;

  const psycho::PsychoModel& model() const { return model_; }
  const MetricConfig& config() const { return cfg_; }

 private:
  psycho::PsychoModel model_;
  MetricConfig cfg_;
};

/// All M_n via cross_threshold + track_masking, then the totals.
MaskingResult objective(std::span<const AudioClip> clips,
                        const psycho::PsychoModel& model,
                        const MetricConfig& cfg);

}  // namespace automix::metric
