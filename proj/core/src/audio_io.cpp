#include "automix/audio_io.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace automix {

bool is_supported_sample_rate(int sample_rate) {
  return std::ranges::find(kSupportedSampleRates, sample_rate) !=
         std::end(kSupportedSampleRates);
}

AudioClip::AudioClip(int sample_rate, std::vector<double> samples)
    : sample_rate_(sample_rate), samples_(std::move(samples)) {
  if (!is_supported_sample_rate(sample_rate_)) {
    throw std::invalid_argument("unsupported sample rate " +
                                std::to_string(sample_rate_));
  }
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    if (!std::isfinite(samples_[i])) {
      throw std::invalid_argument("non-finite sample at index " +
                                  std::to_string(i));
    }
  }
}

AudioClip AudioClip::silence(int sample_rate, std::size_t length) {
  return AudioClip(sample_rate, std::vector<double>(length, 0.0));
}

double AudioClip::duration_s() const {
  return static_cast<double>(samples_.size()) / sample_rate_;
}

AudioClip AudioClip::scaled(double gain) const {
  std::vector<double> out(samples_.size());
  std::ranges::transform(samples_, out.begin(),
                         [gain](double s) { return s * gain; });
  return AudioClip(sample_rate_, std::move(out));
}

AudioClip AudioClip::slice(std::size_t start, std::size_t count) const {
  start = std::min(start, samples_.size());
  const std::size_t end = std::min(samples_.size(), start + count);
  return AudioClip(sample_rate_,
                   std::vector<double>(samples_.begin() + start,
                                       samples_.begin() + end));
}

double rms_difference(const AudioClip& a, const AudioClip& b) {
  if (a.length() != b.length()) {
    throw std::invalid_argument("rms_difference: length mismatch");
  }
  if (a.empty()) return 0.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < a.length(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return std::sqrt(acc / static_cast<double>(a.length()));
}

double peak(const AudioClip& clip) {
  double p = 0.0;
  for (double s : clip.samples()) p = std::max(p, std::abs(s));
  return p;
}

std::size_t frame_count(std::size_t length, std::size_t hop) {
  return hop == 0 ? 0 : (length + hop - 1) / hop;
}

std::vector<std::vector<double>> frame_signal(const AudioClip& clip,
                                              std::size_t frame_len,
                                              std::size_t hop) {
  if (hop < 1 || frame_len < hop) {
    throw std::invalid_argument("frame_signal requires frame_len >= hop >= 1");
  }
  const auto samples = clip.samples();
  const std::size_t n_frames = frame_count(samples.size(), hop);
  std::vector<std::vector<double>> frames(n_frames,
                                          std::vector<double>(frame_len, 0.0));
  for (std::size_t k = 0; k < n_frames; ++k) {
    const std::size_t start = k * hop;
    const std::size_t n = std::min(frame_len, samples.size() - start);
    std::copy_n(samples.begin() + start, n, frames[k].begin());
  }
  return frames;
}

AudioClip sum_tracks(std::span<const AudioClip> clips) {
  if (clips.empty()) {
    throw std::invalid_argument("sum_tracks: no clips");
  }
  const int rate = clips.front().sample_rate();
  std::size_t length = 0;
  for (const auto& c : clips) {
    if (c.sample_rate() != rate) {
      throw std::invalid_argument("sum_tracks: mismatched sample rates");
    }
    length = std::max(length, c.length());
  }
  std::vector<double> out(length, 0.0);
  for (const auto& c : clips) {
    const auto s = c.samples();
    for (std::size_t i = 0; i < s.size(); ++i) out[i] += s[i];
  }
  return AudioClip(rate, std::move(out));
}

}  // namespace automix
