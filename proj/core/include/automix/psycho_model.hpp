#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "automix/audio_io.hpp"

namespace automix::psycho {

/// Bark value of a frequency: 13 atan(0.00076 f) + 3.5 atan((f / 7500)^2).
double bark(double hz);

/// Model-2 spreading function. `dz` is maskee bark minus masker bark; the
/// result is a linear power gain (0 below the -100 dB cutoff).
double spreading(double dz);

/// (tone-masking-noise, noise-masking-tone) offsets in dB: (29, 6).
std::pair<double, double> tmn_nmt_offsets();

/// SNR offset for tonality `t` in [0,1]: max(minval, t*TMN + (1-t)*NMT).
double snr_offset_db(double tonality, double minval_db);

/// Absolute threshold of hearing in dB SPL (Terhardt), capped at
/// `ceiling_db`. Frequencies below 20 Hz are evaluated at 20 Hz.
double threshold_in_quiet_db_spl(double hz, double ceiling_db);

/// Minimum SNR for a partition at bark value `z`.
double minval_db(double z);

struct PsychoConfig {
  std::size_t fft_size = 1024;
  std::size_t hop = 512;
  double partition_width_bark = 1.0 / 3.0;
  /// SPL assigned to the spectral-line energy of a full-scale sine.
  double full_scale_db_spl = 96.0;
  double quiet_ceiling_db_spl = 60.0;

  friend bool operator==(const PsychoConfig&, const PsychoConfig&) = default;
};

/// Threshold partition: contiguous FFT lines [lo, hi].
struct Partition {
  std::size_t lo = 0;
  std::size_t hi = 0;
  double bark = 0.0;
  double minval_db = 0.0;
  double qthr = 0.0;  // threshold in quiet, partition energy

  std::size_t width() const { return hi - lo + 1; }
};

/// Scale-factor band: FFT lines [lo, hi).
struct ScaleFactorBand {
  std::size_t lo = 0;
  std::size_t hi = 0;
};

/// Windowed FFT of one analysis frame, normalised so a full-scale sine gives
/// unit magnitude at its peak line.
struct SpectralFrame {
  std::size_t frame_index = 0;
  std::vector<std::complex<double>> bins;  // fft_size/2 + 1 lines

  std::vector<double> magnitudes() const;
  std::vector<double> phases() const;
};

struct PsychoFrame {
  std::vector<double> esb;       // per scale-factor band energy
  std::vector<double> thr;       // per scale-factor band threshold
  std::vector<double> tonality;  // per partition, [0, 1]
};

/// MPEG-1 psychoacoustic model 2 (long blocks) for one sample rate.
/// Thread-safe for concurrent const use.
class PsychoModel {
 public:
  explicit PsychoModel(int sample_rate, PsychoConfig config = {});

  int sample_rate() const;
  const PsychoConfig& config() const;
  const std::vector<Partition>& partitions() const;
  const std::vector<ScaleFactorBand>& bands() const;
  std::size_t band_count() const { return bands().size(); }
  std::size_t line_count() const;

  /// Row-major [masker][maskee] spreading gains between partitions.
  const std::vector<double>& spreading_matrix() const;

  /// Threshold in quiet mapped onto scale-factor bands.
  const std::vector<double>& quiet_threshold_bands() const;

  /// Hann-windowed spectra, one per frame of frame_signal(clip, N, hop).
  std::vector<SpectralFrame> spectra(const AudioClip& clip) const;

  /// Full threshold analysis over a frame sequence (stateful across frames).
  std::vector<PsychoFrame> analyze(std::span<const SpectralFrame> frames) const;

  std::vector<PsychoFrame> analyze_track(const AudioClip& clip) const;

  /// Scale-factor band energies only (no threshold computation).
  std::vector<double> band_energies(const SpectralFrame& frame) const;

  /// e(b): energy per partition.
  std::vector<double> partition_energies(const SpectralFrame& frame) const;

 private:
  struct Impl;
  std::shared_ptr<const Impl> impl_;
};

/// Long-block scale-factor band edges, in 576-line MDCT units, for a rate.
std::span<const int> scale_factor_band_edges(int sample_rate);

}  // namespace automix::psycho
