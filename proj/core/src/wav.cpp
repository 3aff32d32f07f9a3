#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "automix/audio_io.hpp"

namespace automix {

namespace {

constexpr std::uint16_t kFormatPcm = 0x0001;
constexpr std::uint16_t kFormatFloat = 0x0003;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint16_t read_u16(const std::uint8_t* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t read_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) |
         (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) {
    out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xFF));
  }
}

void put_tag(std::vector<std::uint8_t>& out, const char* tag) {
  out.insert(out.end(), tag, tag + 4);
}

double decode_sample(const std::uint8_t* p, std::uint16_t format,
                     std::uint16_t bits) {
  if (format == kFormatFloat) {
    const float f = std::bit_cast<float>(read_u32(p));
    return static_cast<double>(f);
  }
  if (bits == 16) {
    return static_cast<std::int16_t>(read_u16(p)) / 32768.0;
  }
  // 24-bit: sign-extend from the top byte.
  std::int32_t v = static_cast<std::int32_t>(p[0] | (p[1] << 8) | (p[2] << 16));
  if (v & 0x800000) v -= 0x1000000;
  return v / 8388608.0;
}

}  // namespace

WavError::WavError(WavErrorKind kind, const std::filesystem::path& path,
                   const std::string& reason)
    : std::runtime_error(path.string() + ": " + reason),
      kind_(kind),
      path_(path) {}

AudioClip read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw WavError(WavErrorKind::kUnreadable, path, "cannot open file");
  }
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                        std::istreambuf_iterator<char>());
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw WavError(WavErrorKind::kMalformed, path, "not a RIFF/WAVE file");
  }

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  const std::uint8_t* data = nullptr;
  std::size_t data_size = 0;
  bool have_fmt = false;

  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::uint8_t* chunk = bytes.data() + pos;
    const std::size_t size = read_u32(chunk + 4);
    const std::size_t body = pos + 8;
    const std::size_t avail = std::min(size, bytes.size() - body);
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (avail < 16) {
        throw WavError(WavErrorKind::kMalformed, path, "short fmt chunk");
      }
      format = read_u16(chunk + 8);
      channels = read_u16(chunk + 10);
      rate = read_u32(chunk + 12);
      bits = read_u16(chunk + 22);
      if (format == kFormatExtensible && avail >= 26) {
        format = read_u16(chunk + 8 + 24);
      }
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data = bytes.data() + body;
      data_size = avail;
    }
    pos = body + size + (size & 1);
  }
  if (!have_fmt || data == nullptr) {
    throw WavError(WavErrorKind::kMalformed, path, "missing fmt or data chunk");
  }

  const bool pcm_ok = format == kFormatPcm && (bits == 16 || bits == 24);
  const bool float_ok = format == kFormatFloat && bits == 32;
  if (!pcm_ok && !float_ok) {
    throw WavError(WavErrorKind::kUnsupportedEncoding, path,
                   "unsupported encoding (format " + std::to_string(format) +
                       ", " + std::to_string(bits) + " bits)");
  }
  if (channels < 1 || channels > 2) {
    throw WavError(WavErrorKind::kUnsupportedEncoding, path,
                   "unsupported channel count " + std::to_string(channels));
  }
  if (!is_supported_sample_rate(static_cast<int>(rate))) {
    throw WavError(WavErrorKind::kUnsupportedSampleRate, path,
                   "unsupported sample rate " + std::to_string(rate));
  }

  const std::size_t sample_bytes = bits / 8;
  const std::size_t frame_bytes = sample_bytes * channels;
  const std::size_t n = data_size / frame_bytes;
  std::vector<double> samples(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint8_t* f = data + i * frame_bytes;
    if (channels == 1) {
      samples[i] = decode_sample(f, format, bits);
    } else {
      samples[i] = 0.5 * (decode_sample(f, format, bits) +
                          decode_sample(f + sample_bytes, format, bits));
    }
    if (!std::isfinite(samples[i])) {
      throw WavError(WavErrorKind::kMalformed, path, "non-finite sample");
    }
  }
  return AudioClip(static_cast<int>(rate), std::move(samples));
}

std::size_t write_wav(const AudioClip& clip, const std::filesystem::path& path,
                      WavFormat format) {
  const std::uint16_t bits = format == WavFormat::kPcm16   ? 16
                             : format == WavFormat::kPcm24 ? 24
                                                           : 32;
  const std::uint16_t tag =
      format == WavFormat::kFloat32 ? kFormatFloat : kFormatPcm;
  const std::uint32_t block_align = bits / 8;
  const std::uint32_t data_size =
      static_cast<std::uint32_t>(clip.length() * block_align);

  std::vector<std::uint8_t> out;
  out.reserve(44 + data_size);
  put_tag(out, "RIFF");
  put_u32(out, 36 + data_size);
  put_tag(out, "WAVE");
  put_tag(out, "fmt ");
  put_u32(out, 16);
  put_u16(out, tag);
  put_u16(out, 1);
  put_u32(out, static_cast<std::uint32_t>(clip.sample_rate()));
  put_u32(out, static_cast<std::uint32_t>(clip.sample_rate()) * block_align);
  put_u16(out, static_cast<std::uint16_t>(block_align));
  put_u16(out, bits);
  put_tag(out, "data");
  put_u32(out, data_size);

  std::size_t clipped = 0;
  for (double s : clip.samples()) {
    if (format == WavFormat::kFloat32) {
      put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(s)));
      continue;
    }
    const double scale = format == WavFormat::kPcm16 ? 32768.0 : 8388608.0;
    double q = std::round(s * scale);
    if (q > scale - 1.0 || q < -scale) {
      ++clipped;
      q = std::clamp(q, -scale, scale - 1.0);
    }
    const auto v = static_cast<std::int32_t>(q);
    if (format == WavFormat::kPcm16) {
      put_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(v)));
    } else {
      const auto u = static_cast<std::uint32_t>(v);
      out.push_back(static_cast<std::uint8_t>(u & 0xFF));
      out.push_back(static_cast<std::uint8_t>((u >> 8) & 0xFF));
      out.push_back(static_cast<std::uint8_t>((u >> 16) & 0xFF));
    }
  }

  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) {
    throw WavError(WavErrorKind::kUnwritable, path, "cannot open for writing");
  }
  file.write(reinterpret_cast<const char*>(out.data()),
             static_cast<std::streamsize>(out.size()));
  if (!file) {
    throw WavError(WavErrorKind::kUnwritable, path, "write failed");
  }
  return clipped;
}

}  // namespace automix
