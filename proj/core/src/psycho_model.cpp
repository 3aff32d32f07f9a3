#include "automix/psycho_model.hpp"

#include <fftw3.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace automix::psycho {

namespace {

constexpr double kToneMaskingNoiseDb = 29.0;
constexpr double kNoiseMaskingToneDb = 6.0;

// Long-block scale-factor band edges (MPEG-1 Layer III), 21 bands.
constexpr std::array<int, 22> kSfbEdges44k{0,  4,  8,   12,  16,  20,  24,  30,
                                           36, 44, 52,  62,  74,  90,  110, 134,
                                           162, 196, 238, 288, 342, 418};
constexpr std::array<int, 22> kSfbEdges48k{0,  4,  8,   12,  16,  20,  24,  30,
                                           36, 42, 50,  60,  72,  88,  106, 128,
                                           156, 190, 230, 276, 330, 384};
constexpr double kMdctLines = 576.0;

// (bark, minval dB) anchors, linearly interpolated.
constexpr std::array<std::pair<double, double>, 7> kMinvalAnchors{{
    {0.0, 24.5},
    {3.0, 24.5},
    {6.0, 20.0},
    {9.0, 12.0},
    {12.0, 6.0},
    {15.0, 3.0},
    {18.0, 0.0},
}};

std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwBuffer {
  explicit FftwBuffer(std::size_t n)
      : real(static_cast<double*>(fftw_malloc(sizeof(double) * n))),
        cplx(static_cast<fftw_complex*>(
            fftw_malloc(sizeof(fftw_complex) * (n / 2 + 1)))) {
    if (real == nullptr || cplx == nullptr) throw std::bad_alloc();
  }
  ~FftwBuffer() {
    fftw_free(real);
    fftw_free(cplx);
  }
  FftwBuffer(const FftwBuffer&) = delete;
  FftwBuffer& operator=(const FftwBuffer&) = delete;

  double* real;
  fftw_complex* cplx;
};

}  // namespace

double bark(double hz) {
  const double r = hz / 7500.0;
  return 13.0 * std::atan(0.00076 * hz) + 3.5 * std::atan(r * r);
}

double spreading(double dz) {
  const double tmpx = 1.05 * dz;
  const double u = tmpx - 0.5;
  const double x = 8.0 * std::min(u * u - 2.0 * u, 0.0);
  const double v = tmpx + 0.474;
  const double tmpy = 15.811389 + 7.5 * v - 17.5 * std::sqrt(1.0 + v * v);
  if (tmpy < -100.0) return 0.0;
  return std::pow(10.0, (x + tmpy) / 10.0);
}

std::pair<double, double> tmn_nmt_offsets() {
  return {kToneMaskingNoiseDb, kNoiseMaskingToneDb};
}

double snr_offset_db(double tonality, double minval) {
  const double t = std::clamp(tonality, 0.0, 1.0);
  return std::max(minval,
                  t * kToneMaskingNoiseDb + (1.0 - t) * kNoiseMaskingToneDb);
}

double threshold_in_quiet_db_spl(double hz, double ceiling_db) {
  const double khz = std::max(hz, 20.0) / 1000.0;
  const double ath = 3.64 * std::pow(khz, -0.8) -
                     6.5 * std::exp(-0.6 * (khz - 3.3) * (khz - 3.3)) +
                     1e-3 * std::pow(khz, 4.0);
  return std::min(ath, ceiling_db);
}

double minval_db(double z) {
  if (z <= kMinvalAnchors.front().first) return kMinvalAnchors.front().second;
  for (std::size_t i = 1; i < kMinvalAnchors.size(); ++i) {
    const auto [z1, v1] = kMinvalAnchors[i];
    if (z <= z1) {
      const auto [z0, v0] = kMinvalAnchors[i - 1];
      return v0 + (v1 - v0) * (z - z0) / (z1 - z0);
    }
  }
  return kMinvalAnchors.back().second;
}

std::span<const int> scale_factor_band_edges(int sample_rate) {
  if (sample_rate == 44100) return kSfbEdges44k;
  if (sample_rate == 48000) return kSfbEdges48k;
  throw std::invalid_argument("no scale-factor band table for " +
                              std::to_string(sample_rate) + " Hz");
}

std::vector<double> SpectralFrame::magnitudes() const {
  std::vector<double> m(bins.size());
  std::ranges::transform(bins, m.begin(),
                         [](std::complex<double> c) { return std::abs(c); });
  return m;
}

std::vector<double> SpectralFrame::phases() const {
  std::vector<double> p(bins.size());
  std::ranges::transform(bins, p.begin(),
                         [](std::complex<double> c) { return std::arg(c); });
  return p;
}

struct PsychoModel::Impl {
  int sample_rate = 44100;
  PsychoConfig config;
  std::size_t lines = 0;
  std::vector<double> window;
  double spectrum_scale = 1.0;
  std::vector<Partition> partitions;
  std::vector<std::size_t> line_partition;
  std::vector<double> spread;  // [masker * P + maskee]
  std::vector<double> rnorm;
  std::vector<ScaleFactorBand> bands;
  std::vector<double> quiet_bands;
  fftw_plan plan = nullptr;

  Impl(int rate, PsychoConfig cfg);
  ~Impl() {
    std::lock_guard lock(fftw_planner_mutex());
    if (plan != nullptr) fftw_destroy_plan(plan);
  }
  Impl(const Impl&) = delete;
  Impl& operator=(const Impl&) = delete;

  double line_hz(std::size_t l) const {
    return static_cast<double>(l) * sample_rate /
           static_cast<double>(config.fft_size);
  }
};

PsychoModel::Impl::Impl(int rate, PsychoConfig cfg)
    : sample_rate(rate), config(cfg) {
  if (!is_supported_sample_rate(rate)) {
    throw std::invalid_argument("psycho model: unsupported sample rate " +
                                std::to_string(rate));
  }
  const std::size_t n = config.fft_size;
  if (n < 64 || (n & (n - 1)) != 0 || config.hop < 1 || config.hop > n) {
    throw std::invalid_argument(
        "psycho model: fft_size must be a power of two >= 64 and "
        "1 <= hop <= fft_size");
  }
  lines = n / 2 + 1;

  window.resize(n);
  double window_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    window[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi *
                                     (static_cast<double>(i) + 0.5) /
                                     static_cast<double>(n));
    window_sum += window[i];
  }
  spectrum_scale = 2.0 / window_sum;

  // Threshold partitions of ~1/3 bark built from line-centre bark values.
  line_partition.resize(lines);
  std::size_t lo = 0;
  while (lo < lines) {
    const double z0 = bark(line_hz(lo));
    std::size_t hi = lo;
    while (hi + 1 < lines &&
           bark(line_hz(hi + 1)) - z0 < config.partition_width_bark) {
      ++hi;
    }
    Partition p;
    p.lo = lo;
    p.hi = hi;
    p.bark = bark(0.5 * (line_hz(lo) + line_hz(hi)));
    p.minval_db = minval_db(p.bark);
    double min_quiet = std::numeric_limits<double>::infinity();
    for (std::size_t l = lo; l <= hi; ++l) {
      const double db = threshold_in_quiet_db_spl(
          line_hz(l), config.quiet_ceiling_db_spl);
      min_quiet = std::min(
          min_quiet, std::pow(10.0, (db - config.full_scale_db_spl) / 10.0));
      line_partition[l] = partitions.size();
    }
    p.qthr = min_quiet * static_cast<double>(p.width());
    partitions.push_back(p);
    lo = hi + 1;
  }

  const std::size_t np = partitions.size();
  spread.resize(np * np);
  rnorm.assign(np, 0.0);
  for (std::size_t masker = 0; masker < np; ++masker) {
    for (std::size_t maskee = 0; maskee < np; ++maskee) {
      const double s =
          spreading(partitions[maskee].bark - partitions[masker].bark);
      spread[masker * np + maskee] = s;
      rnorm[maskee] += s;
    }
  }
  for (double& r : rnorm) r = r > 0.0 ? 1.0 / r : 0.0;

  const auto edges = scale_factor_band_edges(rate);
  const double mdct_hz = rate / (2.0 * kMdctLines);
  for (std::size_t sb = 0; sb + 1 < edges.size(); ++sb) {
    const double f_lo = edges[sb] * mdct_hz;
    const double f_hi = edges[sb + 1] * mdct_hz;
    ScaleFactorBand band;
    band.lo = static_cast<std::size_t>(std::ceil(f_lo / line_hz(1)));
    band.hi = static_cast<std::size_t>(std::ceil(f_hi / line_hz(1)));
    band.hi = std::min(band.hi, lines);
    bands.push_back(band);
  }

  quiet_bands.assign(bands.size(), 0.0);
  for (std::size_t sb = 0; sb < bands.size(); ++sb) {
    for (std::size_t l = bands[sb].lo; l < bands[sb].hi; ++l) {
      const Partition& p = partitions[line_partition[l]];
      quiet_bands[sb] += p.qthr / static_cast<double>(p.width());
    }
  }

  FftwBuffer scratch(n);
  std::lock_guard lock(fftw_planner_mutex());
  plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), scratch.real, scratch.cplx,
                              FFTW_ESTIMATE);
  if (plan == nullptr) throw std::runtime_error("FFTW planning failed");
}

PsychoModel::PsychoModel(int sample_rate, PsychoConfig config)
    : impl_(std::make_shared<const Impl>(sample_rate, config)) {}

int PsychoModel::sample_rate() const { return impl_->sample_rate; }
const PsychoConfig& PsychoModel::config() const { return impl_->config; }
const std::vector<Partition>& PsychoModel::partitions() const {
  return impl_->partitions;
}
const std::vector<ScaleFactorBand>& PsychoModel::bands() const {
  return impl_->bands;
}
std::size_t PsychoModel::line_count() const { return impl_->lines; }
const std::vector<double>& PsychoModel::spreading_matrix() const {
  return impl_->spread;
}
const std::vector<double>& PsychoModel::quiet_threshold_bands() const {
  return impl_->quiet_bands;
}

std::vector<SpectralFrame> PsychoModel::spectra(const AudioClip& clip) const {
  const Impl& m = *impl_;
  if (clip.sample_rate() != m.sample_rate) {
    throw std::invalid_argument("psycho model: clip rate does not match model");
  }
  const std::size_t n = m.config.fft_size;
  auto frames = frame_signal(clip, n, m.config.hop);
  if (frames.empty()) frames.emplace_back(n, 0.0);

  FftwBuffer buf(n);
  std::vector<SpectralFrame> out(frames.size());
  for (std::size_t k = 0; k < frames.size(); ++k) {
    for (std::size_t i = 0; i < n; ++i) buf.real[i] = frames[k][i] * m.window[i];
    fftw_execute_dft_r2c(m.plan, buf.real, buf.cplx);
    out[k].frame_index = k;
    out[k].bins.resize(m.lines);
    for (std::size_t l = 0; l < m.lines; ++l) {
      out[k].bins[l] = {buf.cplx[l][0] * m.spectrum_scale,
                        buf.cplx[l][1] * m.spectrum_scale};
    }
  }
  return out;
}

std::vector<double> PsychoModel::band_energies(const SpectralFrame& frame) const {
  const Impl& m = *impl_;
  std::vector<double> esb(m.bands.size(), 0.0);
  for (std::size_t sb = 0; sb < m.bands.size(); ++sb) {
    double e = 0.0;
    for (std::size_t l = m.bands[sb].lo; l < m.bands[sb].hi; ++l) {
      e += std::norm(frame.bins[l]);
    }
    esb[sb] = e;
  }
  return esb;
}

std::vector<double> PsychoModel::partition_energies(
    const SpectralFrame& frame) const {
  const Impl& m = *impl_;
  std::vector<double> e(m.partitions.size(), 0.0);
  for (std::size_t l = 0; l < m.lines; ++l) {
    e[m.line_partition[l]] += std::norm(frame.bins[l]);
  }
  return e;
}

std::vector<PsychoFrame> PsychoModel::analyze(
    std::span<const SpectralFrame> frames) const {
  const Impl& m = *impl_;
  const std::size_t np = m.partitions.size();
  const std::size_t lines = m.lines;
  constexpr double kInf = std::numeric_limits<double>::infinity();

  // Polar history for the predictor: magnitudes and unit phasors (re, im) of
  // the two previous frames.
  std::vector<double> r1(lines, 0.0), r2(lines, 0.0);
  std::vector<double> u1re(lines, 1.0), u1im(lines, 0.0), u2re(lines, 1.0),
      u2im(lines, 0.0);
  std::vector<double> nb_prev1(np, kInf), nb_prev2(np, kInf);

  std::vector<double> energy(np), weighted_c(np), ecb(np), ct(np), nb(np),
      thr_part(np);
  std::vector<PsychoFrame> out;
  out.reserve(frames.size());

  for (const SpectralFrame& frame : frames) {
    if (frame.bins.size() != lines) {
      throw std::invalid_argument("psycho model: frame has wrong line count");
    }
    std::ranges::fill(energy, 0.0);
    std::ranges::fill(weighted_c, 0.0);

    for (std::size_t l = 0; l < lines; ++l) {
      const double xr = frame.bins[l].real();
      const double xi = frame.bins[l].imag();
      const double e = xr * xr + xi * xi;
      const double r = std::sqrt(e);
      const double r_hat = 2.0 * r1[l] - r2[l];
      // u1^2 * conj(u2)
      const double sq_re = u1re[l] * u1re[l] - u1im[l] * u1im[l];
      const double sq_im = 2.0 * u1re[l] * u1im[l];
      const double pr = r_hat * (sq_re * u2re[l] + sq_im * u2im[l]);
      const double pi = r_hat * (sq_im * u2re[l] - sq_re * u2im[l]);
      const double denom = r + std::abs(r_hat);
      const double c =
          denom > 0.0 ? std::sqrt((xr - pr) * (xr - pr) + (xi - pi) * (xi - pi)) / denom
                      : 1.0;

      const std::size_t b = m.line_partition[l];
      energy[b] += e;
      weighted_c[b] += e * c;

      r2[l] = r1[l];
      u2re[l] = u1re[l];
      u2im[l] = u1im[l];
      r1[l] = r;
      if (r > 0.0) {
        u1re[l] = xr / r;
        u1im[l] = xi / r;
      } else {
        u1re[l] = 1.0;
        u1im[l] = 0.0;
      }
    }

    std::ranges::fill(ecb, 0.0);
    std::ranges::fill(ct, 0.0);
    for (std::size_t masker = 0; masker < np; ++masker) {
      const double e = energy[masker];
      const double c = weighted_c[masker];
      if (e == 0.0) continue;
      const double* row = &m.spread[masker * np];
      for (std::size_t maskee = 0; maskee < np; ++maskee) {
        ecb[maskee] += e * row[maskee];
        ct[maskee] += c * row[maskee];
      }
    }

    PsychoFrame pf;
    pf.tonality.resize(np);
    for (std::size_t b = 0; b < np; ++b) {
      double t = 0.0;
      if (ecb[b] > 0.0) {
        const double cb = ct[b] / ecb[b];
        t = cb > 0.0 ? std::clamp(-0.299 - 0.43 * std::log(cb), 0.0, 1.0) : 1.0;
      }
      pf.tonality[b] = t;
      const double snr = snr_offset_db(t, m.partitions[b].minval_db);
      nb[b] = ecb[b] * m.rnorm[b] * std::pow(10.0, -snr / 10.0);
      const double guarded =
          std::min({nb[b], 2.0 * nb_prev1[b], 16.0 * nb_prev2[b]});
      thr_part[b] = std::max(m.partitions[b].qthr, guarded);
    }
    nb_prev2 = nb_prev1;
    nb_prev1 = nb;

    pf.esb.assign(m.bands.size(), 0.0);
    pf.thr.assign(m.bands.size(), 0.0);
    for (std::size_t sb = 0; sb < m.bands.size(); ++sb) {
      double e = 0.0, t = 0.0;
      for (std::size_t l = m.bands[sb].lo; l < m.bands[sb].hi; ++l) {
        e += frame.bins[l].real() * frame.bins[l].real() +
             frame.bins[l].imag() * frame.bins[l].imag();
        const std::size_t b = m.line_partition[l];
        t += thr_part[b] / static_cast<double>(m.partitions[b].width());
      }
      pf.esb[sb] = e;
      pf.thr[sb] = t;
    }
    out.push_back(std::move(pf));
  }
  return out;
}

std::vector<PsychoFrame> PsychoModel::analyze_track(const AudioClip& clip) const {
  const auto frames = spectra(clip);
  return analyze(frames);
}

}  // namespace automix::psycho
