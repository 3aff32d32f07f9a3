#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <numbers>
#include <span>
#include <random>
#include <string>
#include <vector>

#include "automix/audio_io.hpp"
#include "automix/biquad.hpp"

namespace testsupport {

using automix::AudioClip;

inline AudioClip sine(int rate, double hz, double amplitude, double seconds) {
  const auto n = static_cast<std::size_t>(std::lround(seconds * rate));
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = amplitude * std::sin(2.0 * std::numbers::pi * hz * static_cast<double>(i) / rate);
  }
  return AudioClip(rate, std::move(x));
}

inline AudioClip white_noise(int rate, double sigma, double seconds,
                             std::uint64_t seed) {
  const auto n = static_cast<std::size_t>(std::lround(seconds * rate));
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, sigma);
  std::vector<double> x(n);
  for (auto& v : x) v = dist(rng);
  return AudioClip(rate, std::move(x));
}

// RBJ cookbook low/high pass sections.
inline automix::Biquad pass_section(bool high, double fc, double rate) {
  const double w0 = 2.0 * std::numbers::pi * fc / rate;
  const double q = 1.0 / std::numbers::sqrt2;
  const double alpha = std::sin(w0) / (2.0 * q);
  const double cw = std::cos(w0);
  const double a0 = 1.0 + alpha;
  automix::Biquad s;
  if (high) {
    s.b0 = (1.0 + cw) / 2.0 / a0;
    s.b1 = -(1.0 + cw) / a0;
    s.b2 = s.b0;
  } else {
    s.b0 = (1.0 - cw) / 2.0 / a0;
    s.b1 = (1.0 - cw) / a0;
    s.b2 = s.b0;
  }
  s.a1 = -2.0 * cw / a0;
  s.a2 = (1.0 - alpha) / a0;
  return s;
}

inline double rms(std::span<const double> x) {
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return x.empty() ? 0.0 : std::sqrt(acc / static_cast<double>(x.size()));
}

/// Gaussian noise band-limited to [lo, hi] Hz (4 cascaded sections each
/// side) at an RMS of `rms_db` dB re 1.0.
inline AudioClip band_noise(int rate, double lo, double hi, double rms_db,
                            double seconds, std::uint64_t seed) {
  auto x = white_noise(rate, 1.0, seconds, seed);
  std::vector<double> y(x.samples().begin(), x.samples().end());
  for (int k = 0; k < 4; ++k) {
    automix::filter_in_place(pass_section(true, lo, rate), y);
    automix::filter_in_place(pass_section(false, hi, rate), y);
  }
  const double g = std::pow(10.0, rms_db / 20.0) / rms(y);
  for (auto& v : y) v *= g;
  return AudioClip(rate, std::move(y));
}

inline double db(double ratio) { return 20.0 * std::log10(ratio); }

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("automix_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

// Reference meter: tabulated 48 kHz K-weighting coefficients, direct form I,
// blocks summed directly.
inline double reference_lufs_48k(const AudioClip& clip) {
  const double sb[3] = {1.53512485958697, -2.69169618940638, 1.19839281085285};
  const double sa[3] = {1.0, -1.69065929318241, 0.73248077421585};
  const double hb[3] = {1.0, -2.0, 1.0};
  const double ha[3] = {1.0, -1.99004745483398, 0.99007225036621};
  auto df1 = [](const double* b, const double* a, std::vector<double> x) {
    double x1 = 0, x2 = 0, y1 = 0, y2 = 0;
    for (auto& v : x) {
      const double y = b[0] * v + b[1] * x1 + b[2] * x2 - a[1] * y1 - a[2] * y2;
      x2 = x1;
      x1 = v;
      y2 = y1;
      y1 = y;
      v = y;
    }
    return x;
  };
  std::vector<double> z(clip.samples().begin(), clip.samples().end());
  z = df1(hb, ha, df1(sb, sa, std::move(z)));

  const std::size_t block = 19200, step = 4800;
  std::vector<double> power;
  for (std::size_t s = 0; s + block <= z.size(); s += step) {
    double acc = 0.0;
    for (std::size_t i = s; i < s + block; ++i) acc += z[i] * z[i];
    power.push_back(acc / block);
  }
  auto lufs = [](double p) { return -0.691 + 10.0 * std::log10(p); };
  double sum = 0.0;
  int n = 0;
  for (double p : power) {
    if (lufs(p) > -70.0) {
      sum += p;
      ++n;
    }
  }
  if (n == 0) return -HUGE_VAL;
  const double rel = lufs(sum / n) - 10.0;
  sum = 0.0;
  n = 0;
  for (double p : power) {
    if (lufs(p) > -70.0 && lufs(p) > rel) {
      sum += p;
      ++n;
    }
  }
  return lufs(sum / n);
}

}  // namespace testsupport
