#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace automix {

/// Sample rates the engine has band tables and filter designs for.
inline constexpr int kSupportedSampleRates[] = {44100, 48000};

bool is_supported_sample_rate(int sample_rate);

/// Mono signal at nominal full scale +/-1.0. Immutable once constructed.
class AudioClip {
 public:
  AudioClip() = default;

  /// Throws std::invalid_argument for an unsupported rate or a non-finite
  /// sample.
  AudioClip(int sample_rate, std::vector<double> samples);

  /// Zero-filled clip of `length` samples.
  static AudioClip silence(int sample_rate, std::size_t length);

  int sample_rate() const { return sample_rate_; }
  std::size_t length() const { return samples_.size(); }
  bool empty() const { return samples_.empty(); }
  double duration_s() const;
  std::span<const double> samples() const { return samples_; }
  double operator[](std::size_t i) const { return samples_[i]; }

  /// Copy with every sample multiplied by `gain`.
  AudioClip scaled(double gain) const;

  /// Sub-range [start, start + count) clipped to the clip's extent.
  AudioClip slice(std::size_t start, std::size_t count) const;

  friend bool operator==(const AudioClip&, const AudioClip&) = default;

 private:
  int sample_rate_ = 44100;
  std::vector<double> samples_;
};

/// Root-mean-square difference between two clips of equal length.
double rms_difference(const AudioClip& a, const AudioClip& b);

/// Peak absolute sample value.
double peak(const AudioClip& clip);

// --- framing and summation ---------------------------------------------------

/// Frame k covers samples [k*hop, k*hop + frame_len); the tail frame is
/// zero-padded. Returns ceil(length / hop) frames, none for an empty clip.
std::vector<std::vector<double>> frame_signal(const AudioClip& clip,
                                              std::size_t frame_len,
                                              std::size_t hop);

/// Number of frames frame_signal would produce.
std::size_t frame_count(std::size_t length, std::size_t hop);

/// Elementwise sum, zero-padding shorter clips. No normalisation.
/// Throws std::invalid_argument on mismatched rates or an empty list.
AudioClip sum_tracks(std::span<const AudioClip> clips);

// --- WAV ---------------------------------------------------------------------

enum class WavErrorKind {
  kUnreadable,
  kUnsupportedEncoding,
  kUnsupportedSampleRate,
  kMalformed,
  kUnwritable,
};

class WavError : public std::runtime_error {
 public:
  WavError(WavErrorKind kind, const std::filesystem::path& path,
           const std::string& reason);

  WavErrorKind kind() const { return kind_; }
  const std::filesystem::path& path() const { return path_; }

 private:
  WavErrorKind kind_;
  std::filesystem::path path_;
};

enum class WavFormat { kPcm16, kPcm24, kFloat32 };

/// Reads PCM16/PCM24/float32 RIFF-WAVE with one or two channels. Stereo is
/// averaged to mono per sample.
AudioClip read_wav(const std::filesystem::path& path);

/// Writes a mono file. Integer formats saturate at full scale; the returned
/// value is the number of samples that were clipped.
std::size_t write_wav(const AudioClip& clip, const std::filesystem::path& path,
                      WavFormat format);

}  // namespace automix
