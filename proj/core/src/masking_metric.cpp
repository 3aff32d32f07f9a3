#include "automix/masking_metric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace automix::metric {

namespace {

std::vector<AudioClip> pad_to_common_length(std::span<const AudioClip> clips) {
  std::size_t length = 0;
  for (const auto& c : clips) length = std::max(length, c.length());
  std::vector<AudioClip> out;
  out.reserve(clips.size());
  for (const auto& c : clips) {
    if (c.length() == length) {
      out.push_back(c);
    } else {
      std::vector<double> s(length, 0.0);
      std::ranges::copy(c.samples(), s.begin());
      out.emplace_back(c.sample_rate(), std::move(s));
    }
  }
  return out;
}

void check_rates(std::span<const AudioClip> clips, int rate) {
  for (const auto& c : clips) {
    if (c.sample_rate() != rate) {
      throw std::invalid_argument("masking metric: sample rate mismatch");
    }
  }
}

BandFrames thresholds_of(const std::vector<psycho::PsychoFrame>& frames) {
  BandFrames out;
  out.reserve(frames.size());
  for (const auto& f : frames) out.push_back(f.thr);
  return out;
}

}  // namespace

MaskingResult MaskingResult::from_track_values(std::vector<double> m,
                                               std::vector<std::size_t> active) {
  MaskingResult r;
  r.per_track_m = std::move(m);
  r.active_frame_counts = std::move(active);
  if (r.active_frame_counts.empty()) {
    r.active_frame_counts.assign(r.per_track_m.size(), 0);
  }
  for (double v : r.per_track_m) r.m_total += v * v;
  if (!r.per_track_m.empty()) {
    const auto [lo, hi] = std::ranges::minmax(r.per_track_m);
    r.m_diff = hi - lo;
  }
  r.objective = r.m_total + r.m_diff;
  return r;
}

std::vector<double> frame_levels_db(const AudioClip& clip, std::size_t frame_len,
                                    std::size_t hop) {
  const auto samples = clip.samples();
  const std::size_t n_frames = std::max<std::size_t>(
      1, frame_count(samples.size(), hop));
  std::vector<double> levels(n_frames);
  for (std::size_t k = 0; k < n_frames; ++k) {
    const std::size_t start = k * hop;
    const std::size_t end = std::min(samples.size(), start + frame_len);
    double acc = 0.0;
    for (std::size_t i = start; i < end; ++i) acc += samples[i] * samples[i];
    const double ms = acc / static_cast<double>(frame_len);
    levels[k] = ms > 0.0 ? 10.0 * std::log10(ms)
                         : -std::numeric_limits<double>::infinity();
  }
  return levels;
}

BandFrames cross_threshold(std::size_t n, std::span<const AudioClip> clips,
                           const psycho::PsychoModel& model) {
  if (n >= clips.size()) {
    throw std::out_of_range("cross_threshold: track index out of range");
  }
  check_rates(clips, model.sample_rate());
  const auto padded = pad_to_common_length(clips);
  const AudioClip total = sum_tracks(padded);
  std::vector<double> accompaniment(total.samples().begin(),
                                    total.samples().end());
  const auto own = padded[n].samples();
  for (std::size_t i = 0; i < accompaniment.size(); ++i) {
    accompaniment[i] -= own[i];
  }
  if (clips.size() == 1) std::ranges::fill(accompaniment, 0.0);
  return thresholds_of(model.analyze_track(
      AudioClip(model.sample_rate(), std::move(accompaniment))));
}

TrackMasking track_masking(const BandFrames& esb, const BandFrames& tprime,
                           std::span<const double> levels_db,
                           std::span<const double> quiet_floor,
                           const MetricConfig& cfg) {
  if (esb.size() != tprime.size() || esb.size() != levels_db.size()) {
    throw std::invalid_argument("track_masking: frame count mismatch");
  }
  if (!(cfg.t_max_db > 0.0)) {
    throw std::invalid_argument("track_masking: t_max must be positive");
  }
  TrackMasking out;
  double sum = 0.0;
  for (std::size_t k = 0; k < esb.size(); ++k) {
    if (!(levels_db[k] > cfg.activity_gate_db)) continue;
    ++out.active_frames;
    const auto& e = esb[k];
    const auto& t = tprime[k];
    double frame_masking = 0.0;
    for (std::size_t sb = 0; sb < e.size(); ++sb) {
      double floor = cfg.energy_floor;
      if (sb < quiet_floor.size()) floor = std::max(floor, quiet_floor[sb]);
      if (e[sb] <= floor || !(t[sb] > e[sb])) continue;
      const double msr = 10.0 * std::log10(t[sb] / e[sb]);
      frame_masking += std::clamp(msr, 0.0, cfg.t_max_db) / cfg.t_max_db;
    }
    sum += frame_masking;
  }
  if (out.active_frames > 0) {
    out.m = sum / static_cast<double>(out.active_frames);
  }
  return out;
}

MaskingResult objective(std::span<const AudioClip> clips,
                        const psycho::PsychoModel& model,
                        const MetricConfig& cfg) {
  if (clips.empty()) {
    throw std::invalid_argument("objective: no tracks");
  }
  check_rates(clips, model.sample_rate());
  const auto padded = pad_to_common_length(clips);
  const auto& pc = model.config();

  std::vector<double> m(padded.size());
  std::vector<std::size_t> active(padded.size());
  for (std::size_t n = 0; n < padded.size(); ++n) {
    const auto frames = model.spectra(padded[n]);
    BandFrames esb;
    esb.reserve(frames.size());
    for (const auto& f : frames) esb.push_back(model.band_energies(f));
    const BandFrames tprime = cross_threshold(n, padded, model);
    const auto levels = frame_levels_db(padded[n], pc.fft_size, pc.hop);
    const TrackMasking tm = track_masking(esb, tprime, levels,
                                          model.quiet_threshold_bands(), cfg);
    m[n] = tm.m;
    active[n] = tm.active_frames;
  }
  return MaskingResult::from_track_values(std::move(m), std::move(active));
}

MaskingEvaluator::MaskingEvaluator(psycho::PsychoModel model, MetricConfig cfg)
    : model_(std::move(model)), cfg_(cfg) {}

MaskingResult MaskingEvaluator::evaluate(std::span<const AudioClip> clips) const {
  if (clips.empty()) {
    throw std::invalid_argument("objective: no tracks");
  }
  check_rates(clips, model_.sample_rate());
  const auto padded = pad_to_common_length(clips);
  const auto& pc = model_.config();
  const std::size_t n_tracks = padded.size();

  std::vector<std::vector<psycho::SpectralFrame>> spectra(n_tracks);
  for (std::size_t n = 0; n < n_tracks; ++n) {
    spectra[n] = model_.spectra(padded[n]);
  }
  const std::size_t n_frames = spectra.front().size();
  const std::size_t lines = model_.line_count();

  std::vector<psycho::SpectralFrame> total(n_frames);
  for (std::size_t k = 0; k < n_frames; ++k) {
    total[k].frame_index = k;
    total[k].bins.assign(lines, {0.0, 0.0});
    for (std::size_t n = 0; n < n_tracks; ++n) {
      for (std::size_t l = 0; l < lines; ++l) {
        total[k].bins[l] += spectra[n][k].bins[l];
      }
    }
  }

  std::vector<double> m(n_tracks);
  std::vector<std::size_t> active(n_tracks);
  std::vector<psycho::SpectralFrame> accompaniment(n_frames);
  for (std::size_t n = 0; n < n_tracks; ++n) {
    for (std::size_t k = 0; k < n_frames; ++k) {
      accompaniment[k].frame_index = k;
      accompaniment[k].bins.resize(lines);
      for (std::size_t l = 0; l < lines; ++l) {
        accompaniment[k].bins[l] =
            n_tracks == 1 ? std::complex<double>(0.0, 0.0)
                          : total[k].bins[l] - spectra[n][k].bins[l];
      }
    }
    const BandFrames tprime = thresholds_of(model_.analyze(accompaniment));
    BandFrames esb;
    esb.reserve(n_frames);
    for (const auto& f : spectra[n]) esb.push_back(model_.band_energies(f));
    const auto levels = frame_levels_db(padded[n], pc.fft_size, pc.hop);
    const TrackMasking tm = track_masking(esb, tprime, levels,
                                          model_.quiet_threshold_bands(), cfg_);
    m[n] = tm.m;
    active[n] = tm.active_frames;
  }
  return MaskingResult::from_track_values(std::move(m), std::move(active));
}

}  // namespace automix::metric
