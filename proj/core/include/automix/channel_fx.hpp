#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "automix/audio_io.hpp"
#include "automix/biquad.hpp"

namespace automix::fx {

inline constexpr std::size_t kEqBandCount = 6;
/// Dimensions per track in the optimiser vector: g1..g6, T, R, a, r.
inline constexpr std::size_t kParamsPerTrack = 10;

struct EqBand {
  double center_hz;
  double q;
};

/// Fixed band layout of the six-band equaliser.
inline constexpr std::array<EqBand, kEqBandCount> kEqBands{{
    {75.0, 1.0},
    {100.0, 0.6},
    {250.0, 0.3},
    {750.0, 0.3},
    {2500.0, 0.2},
    {7500.0, 1.0},
}};

struct EqParams {
  std::array<double, kEqBandCount> gains_db{};

  bool is_flat() const;
  friend bool operator==(const EqParams&, const EqParams&) = default;
};

struct DrcParams {
  double threshold_db = 0.0;
  double ratio = 1.0;
  double attack_s = 0.1275;
  double release_s = 1.5025;

  friend bool operator==(const DrcParams&, const DrcParams&) = default;
};

struct TrackParams {
  EqParams eq;
  DrcParams drc;

  friend bool operator==(const TrackParams&, const TrackParams&) = default;
};

struct Range {
  double lo;
  double hi;

  bool contains(double v) const { return v >= lo && v <= hi; }
  double mid() const { return 0.5 * (lo + hi); }
  friend bool operator==(const Range&, const Range&) = default;
};

/// Per-track box bounds, in codec order.
struct ParamBounds {
  Range eq_gain_db;
  Range threshold_db;
  Range ratio;
  Range attack_s;
  Range release_s;

  std::array<Range, kParamsPerTrack> per_dimension() const;

  /// Instrument-stage bounds: EQ +/-6 dB.
  static ParamBounds instrument();
  /// Subgroup (stem) stage bounds: EQ +/-3 dB.
  static ParamBounds subgroup();

  friend bool operator==(const ParamBounds&, const ParamBounds&) = default;
};

/// Neutral processing: flat EQ, ratio 1, threshold 0 dB, attack and release at
/// the centre of their ranges.
TrackParams identity_params(const ParamBounds& bounds);

bool within_bounds(const TrackParams& p, const ParamBounds& bounds);

// --- equaliser ---------------------------------------------------------------

/// Peaking (bell) section, cookbook bilinear design with A = 10^(g/40).
/// Throws std::invalid_argument if fc is not inside (0, fs/2) or q <= 0.
Biquad design_peaking_filter(double fc_hz, double q, double gain_db, double fs);

/// Six peaking sections in `band_order` (defaults to 1..6).
AudioClip apply_eq(const AudioClip& clip, const EqParams& eq);
AudioClip apply_eq(const AudioClip& clip, const EqParams& eq,
                   std::span<const std::size_t> band_order);

// --- compressor --------------------------------------------------------------

/// Static hard-knee curve: gain change in dB (<= 0) for an input level.
double static_gain_db(double level_db, const DrcParams& drc);

/// Feed-forward compressor: log-domain hard-knee gain computer followed by a
/// smoothed branching peak detector on the gain-reduction signal. No makeup.
AudioClip compress(const AudioClip& clip, const DrcParams& drc);

/// Loudness(before) - loudness(after) in dB. Throws loudness::LoudnessError
/// when either clip is silent or shorter than a gating block.
double makeup_gain(const AudioClip& before, const AudioClip& after);

/// EQ -> compressor -> makeup gain.
AudioClip process_track(const AudioClip& clip, const TrackParams& p);

// --- parameter codec -----------------------------------------------------------

struct ParamVector {
  std::vector<double> values;
  std::vector<Range> bounds;

  std::size_t size() const { return values.size(); }
};

ParamVector encode_params(std::span<const TrackParams> params,
                          const ParamBounds& bounds);

/// Box bounds for `n_tracks` tracks.
std::vector<Range> stage_bounds(std::size_t n_tracks, const ParamBounds& bounds);

/// Inverse of encode_params. Values outside their bounds are clamped and
/// counted in `clamped` when provided. Throws std::invalid_argument when the
/// length is not 10 * n_tracks.
std::vector<TrackParams> decode_params(std::span<const double> values,
                                       std::span<const Range> bounds,
                                       std::size_t n_tracks,
                                       std::size_t* clamped = nullptr);
std::vector<TrackParams> decode_params(const ParamVector& v,
                                       std::size_t n_tracks,
                                       std::size_t* clamped = nullptr);

}  // namespace automix::fx
