#include "automix/channel_fx.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>

#include "automix/loudness.hpp"

namespace automix::fx {

namespace {

constexpr double kLn10Over20 = std::numbers::ln10 / 20.0;

// Loudness used for makeup: gated integrated loudness when the clip spans a
// gating block, otherwise the ungated K-weighted power.
double makeup_loudness(const AudioClip& clip) {
  const auto block = static_cast<std::size_t>(
      std::lround(loudness::kBlockSeconds * clip.sample_rate()));
  if (clip.length() >= block) {
    return loudness::integrated_loudness(clip).integrated_lufs;
  }
  const AudioClip z = loudness::k_weight(clip);
  double acc = 0.0;
  for (double s : z.samples()) acc += s * s;
  if (acc <= 0.0) return loudness::kSilenceLufs;
  return -0.691 + 10.0 * std::log10(acc / static_cast<double>(z.length()));
}

}  // namespace

bool EqParams::is_flat() const {
  return std::ranges::all_of(gains_db, [](double g) { return g == 0.0; });
}

std::array<Range, kParamsPerTrack> ParamBounds::per_dimension() const {
  return {eq_gain_db, eq_gain_db, eq_gain_db,   eq_gain_db, eq_gain_db,
          eq_gain_db, threshold_db, ratio,      attack_s,   release_s};
}

ParamBounds ParamBounds::instrument() {
  return {{-6.0, 6.0}, {-30.0, 0.0}, {1.0, 6.0}, {0.005, 0.25}, {0.005, 3.0}};
}

ParamBounds ParamBounds::subgroup() {
  return {{-3.0, 3.0}, {-30.0, 0.0}, {1.0, 6.0}, {0.005, 0.25}, {0.005, 3.0}};
}

TrackParams identity_params(const ParamBounds& bounds) {
  TrackParams p;
  p.drc.threshold_db = 0.0;
  p.drc.ratio = 1.0;
  p.drc.attack_s = bounds.attack_s.mid();
  p.drc.release_s = bounds.release_s.mid();
  return p;
}

bool within_bounds(const TrackParams& p, const ParamBounds& b) {
  return std::ranges::all_of(p.eq.gains_db,
                             [&](double g) { return b.eq_gain_db.contains(g); }) &&
         b.threshold_db.contains(p.drc.threshold_db) &&
         b.ratio.contains(p.drc.ratio) && b.attack_s.contains(p.drc.attack_s) &&
         b.release_s.contains(p.drc.release_s);
}

Biquad design_peaking_filter(double fc_hz, double q, double gain_db,
                             double fs) {
  if (!(fc_hz > 0.0) || fc_hz >= fs / 2.0) {
    throw std::invalid_argument("peaking filter: centre frequency " +
                                std::to_string(fc_hz) +
                                " Hz outside (0, Nyquist)");
  }
  if (!(q > 0.0)) {
    throw std::invalid_argument("peaking filter: q must be positive");
  }
  const double a = std::pow(10.0, gain_db / 40.0);
  const double w0 = 2.0 * std::numbers::pi * fc_hz / fs;
  const double alpha = std::sin(w0) / (2.0 * q);
  const double cw = std::cos(w0);
  const double a0 = 1.0 + alpha / a;

  Biquad s;
  s.b0 = (1.0 + alpha * a) / a0;
  s.b1 = (-2.0 * cw) / a0;
  s.b2 = (1.0 - alpha * a) / a0;
  s.a1 = (-2.0 * cw) / a0;
  s.a2 = (1.0 - alpha / a) / a0;
  return s;
}

AudioClip apply_eq(const AudioClip& clip, const EqParams& eq) {
  static constexpr std::array<std::size_t, kEqBandCount> kNaturalOrder{
      0, 1, 2, 3, 4, 5};
  return apply_eq(clip, eq, kNaturalOrder);
}

AudioClip apply_eq(const AudioClip& clip, const EqParams& eq,
                   std::span<const std::size_t> band_order) {
  std::array<bool, kEqBandCount> seen{};
  for (std::size_t band : band_order) {
    if (band >= kEqBandCount || seen[band]) {
      throw std::invalid_argument("apply_eq: band order must be a permutation");
    }
    seen[band] = true;
  }
  if (band_order.size() != kEqBandCount) {
    throw std::invalid_argument("apply_eq: band order must be a permutation");
  }
  if (eq.is_flat()) return clip;
  std::vector<double> y(clip.samples().begin(), clip.samples().end());
  for (std::size_t band : band_order) {
    const double g = eq.gains_db.at(band);
    if (g == 0.0) continue;
    const Biquad s = design_peaking_filter(kEqBands[band].center_hz,
                                           kEqBands[band].q, g,
                                           clip.sample_rate());
    filter_in_place(s, y);
  }
  return AudioClip(clip.sample_rate(), std::move(y));
}

double static_gain_db(double level_db, const DrcParams& drc) {
  if (level_db <= drc.threshold_db) return 0.0;
  return (level_db - drc.threshold_db) * (1.0 / drc.ratio - 1.0);
}

AudioClip compress(const AudioClip& clip, const DrcParams& drc) {
  if (drc.ratio == 1.0) return clip;
  const double fs = clip.sample_rate();
  const double alpha_attack = std::exp(-1.0 / (drc.attack_s * fs));
  const double alpha_release = std::exp(-1.0 / (drc.release_s * fs));
  const double slope = 1.0 - 1.0 / drc.ratio;
  const double threshold_lin = std::pow(10.0, drc.threshold_db / 20.0);

  const auto x = clip.samples();
  std::vector<double> y(x.size());
  double level = 0.0;  // smoothed gain reduction, dB >= 0
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double mag = std::abs(x[i]);
    double reduction = 0.0;
    if (mag > threshold_lin) {
      reduction = (20.0 * std::log10(mag) - drc.threshold_db) * slope;
    }
    if (reduction > level) {
      level = alpha_attack * level + (1.0 - alpha_attack) * reduction;
    } else {
      level = alpha_release * level + (1.0 - alpha_release) * reduction;
    }
    y[i] = level > 0.0 ? x[i] * std::exp(-level * kLn10Over20) : x[i];
  }
  return AudioClip(clip.sample_rate(), std::move(y));
}

double makeup_gain(const AudioClip& before, const AudioClip& after) {
  const auto b = loudness::integrated_loudness(before);
  const auto a = loudness::integrated_loudness(after);
  if (b.silent() || a.silent()) {
    throw loudness::LoudnessError("makeup gain undefined for silence");
  }
  return b.integrated_lufs - a.integrated_lufs;
}

AudioClip process_track(const AudioClip& clip, const TrackParams& p) {
  AudioClip eq_out = apply_eq(clip, p.eq);
  if (p.drc.ratio == 1.0) return eq_out;

  AudioClip compressed = compress(eq_out, p.drc);
  const double before = makeup_loudness(eq_out);
  const double after = makeup_loudness(compressed);
  if (before == loudness::kSilenceLufs || after == loudness::kSilenceLufs) {
    return compressed;
  }
  return compressed.scaled(loudness::db_to_gain(before - after));
}

std::vector<Range> stage_bounds(std::size_t n_tracks, const ParamBounds& b) {
  const auto dims = b.per_dimension();
  std::vector<Range> out;
  out.reserve(n_tracks * kParamsPerTrack);
  for (std::size_t t = 0; t < n_tracks; ++t) {
    out.insert(out.end(), dims.begin(), dims.end());
  }
  return out;
}

ParamVector encode_params(std::span<const TrackParams> params,
                          const ParamBounds& bounds) {
  ParamVector v;
  v.bounds = stage_bounds(params.size(), bounds);
  v.values.reserve(params.size() * kParamsPerTrack);
  for (const auto& p : params) {
    v.values.insert(v.values.end(), p.eq.gains_db.begin(), p.eq.gains_db.end());
    v.values.push_back(p.drc.threshold_db);
    v.values.push_back(p.drc.ratio);
    v.values.push_back(p.drc.attack_s);
    v.values.push_back(p.drc.release_s);
  }
  return v;
}

std::vector<TrackParams> decode_params(std::span<const double> values,
                                       std::span<const Range> bounds,
                                       std::size_t n_tracks,
                                       std::size_t* clamped) {
  if (values.size() != n_tracks * kParamsPerTrack ||
      bounds.size() != values.size()) {
    throw std::invalid_argument(
        "decode_params: expected " + std::to_string(n_tracks * kParamsPerTrack) +
        " values, got " + std::to_string(values.size()));
  }
  std::size_t n_clamped = 0;
  auto at = [&](std::size_t i) {
    const double v = values[i];
    const double c = std::clamp(v, bounds[i].lo, bounds[i].hi);
    if (c != v) ++n_clamped;
    return c;
  };
  std::vector<TrackParams> out(n_tracks);
  for (std::size_t t = 0; t < n_tracks; ++t) {
    const std::size_t base = t * kParamsPerTrack;
    for (std::size_t b = 0; b < kEqBandCount; ++b) {
      out[t].eq.gains_db[b] = at(base + b);
    }
    out[t].drc.threshold_db = at(base + 6);
    out[t].drc.ratio = at(base + 7);
    out[t].drc.attack_s = at(base + 8);
    out[t].drc.release_s = at(base + 9);
  }
  if (clamped != nullptr) *clamped += n_clamped;
  return out;
}

std::vector<TrackParams> decode_params(const ParamVector& v,
                                       std::size_t n_tracks,
                                       std::size_t* clamped) {
  return decode_params(v.values, v.bounds, n_tracks, clamped);
}

}  // namespace automix::fx
