// Copyright 2026 The psenh Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "psenh/audio.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "psenh/errors.hpp"

namespace psenh {

static_assert(std::endian::native == std::endian::little,
              "WAV and checkpoint IO assume a little-endian host");

void validate_clip(const AudioClip &clip) {
  if (clip.samples.empty()) throw DataError("audio clip is empty");
  if (clip.sample_rate <= 0) throw DataError("audio clip has no sample rate");
  for (double v : clip.samples) {
    if (!std::isfinite(v)) throw DataError("audio clip holds non-finite samples");
  }
}

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

template <typename T>
T read_le(const char *p) {
  T v;
  std::memcpy(&v, p, sizeof(T));
  return v;
}

struct ParsedWav {
  WavInfo info;
  std::uint16_t format = 0;
  std::vector<char> data;
};

ParsedWav parse_wav(const std::filesystem::path &path, bool want_data) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open wav file " + path.string());
  char riff[12];
  if (!in.read(riff, 12) || std::memcmp(riff, "RIFF", 4) != 0 ||
      std::memcmp(riff + 8, "WAVE", 4) != 0) {
    throw DataError("not a RIFF/WAVE file: " + path.string());
  }
  ParsedWav out;
  bool have_fmt = false;
  char hdr[8];
  while (in.read(hdr, 8)) {
    const auto size = read_le<std::uint32_t>(hdr + 4);
    if (std::memcmp(hdr, "fmt ", 4) == 0) {
      std::vector<char> fmt(size);
      if (size < 16 || !in.read(fmt.data(), size)) {
        throw DataError("truncated fmt chunk in " + path.string());
      }
      out.format = read_le<std::uint16_t>(fmt.data());
      out.info.channels = read_le<std::uint16_t>(fmt.data() + 2);
      out.info.sample_rate = static_cast<int>(read_le<std::uint32_t>(fmt.data() + 4));
      out.info.bits_per_sample = read_le<std::uint16_t>(fmt.data() + 14);
      if (out.format == kFormatExtensible && size >= 26) {
        out.format = read_le<std::uint16_t>(fmt.data() + 24);
      }
      have_fmt = true;
    } else if (std::memcmp(hdr, "data", 4) == 0) {
      if (!have_fmt) throw DataError("data chunk before fmt in " + path.string());
      const int bytes = out.info.bits_per_sample / 8;
      if (bytes == 0 || out.info.channels == 0) {
        throw DataError("bad wav format in " + path.string());
      }
      out.info.num_samples = size / (bytes * out.info.channels);
      if (want_data) {
        out.data.resize(size);
        if (!in.read(out.data.data(), size)) {
          throw DataError("truncated data chunk in " + path.string());
        }
      }
      return out;
    } else {
      in.seekg(size + (size & 1), std::ios::cur);
    }
  }
  throw DataError("no data chunk in " + path.string());
}

void check_supported(const ParsedWav &w, const std::filesystem::path &path) {
  if (w.info.channels != 1) {
    throw DataError("only mono wav is supported: " + path.string());
  }
  const bool pcm16 = w.format == kFormatPcm && w.info.bits_per_sample == 16;
  const bool f32 = w.format == kFormatFloat && w.info.bits_per_sample == 32;
  if (!pcm16 && !f32) {
    throw DataError("unsupported wav encoding (need pcm16 or float32): " +
                    path.string());
  }
}

}  // namespace

WavInfo probe_wav(const std::filesystem::path &path) {
  auto w = parse_wav(path, false);
  check_supported(w, path);
  return w.info;
}

AudioClip read_wav(const std::filesystem::path &path) {
  auto w = parse_wav(path, true);
  check_supported(w, path);
  AudioClip clip;
  clip.sample_rate = w.info.sample_rate;
  clip.samples.resize(w.info.num_samples);
  if (w.info.bits_per_sample == 16) {
    for (std::size_t i = 0; i < w.info.num_samples; ++i) {
      clip.samples[i] = read_le<std::int16_t>(w.data.data() + 2 * i) / 32768.0;
    }
  } else {
    for (std::size_t i = 0; i < w.info.num_samples; ++i) {
      clip.samples[i] = read_le<float>(w.data.data() + 4 * i);
    }
  }
  return clip;
}

void write_wav(const std::filesystem::path &path, const AudioClip &clip,
               WavEncoding encoding) {
  const bool f32 = encoding == WavEncoding::kFloat32;
  const std::uint16_t bits = f32 ? 32 : 16;
  const std::uint16_t block = bits / 8;
  const auto data_bytes = static_cast<std::uint32_t>(clip.samples.size() * block);

  std::vector<char> buf;
  buf.reserve(44 + data_bytes);
  auto put = [&buf](const auto v) {
    const char *p = reinterpret_cast<const char *>(&v);
    buf.insert(buf.end(), p, p + sizeof(v));
  };
  auto tag = [&buf](const char *t) { buf.insert(buf.end(), t, t + 4); };
  tag("RIFF");
  put(static_cast<std::uint32_t>(36 + data_bytes));
  tag("WAVE");
  tag("fmt ");
  put(std::uint32_t{16});
  put(f32 ? kFormatFloat : kFormatPcm);
  put(std::uint16_t{1});
  put(static_cast<std::uint32_t>(clip.sample_rate));
  put(static_cast<std::uint32_t>(clip.sample_rate * block));
  put(block);
  put(bits);
  tag("data");
  put(data_bytes);
  for (double v : clip.samples) {
    if (f32) {
      put(static_cast<float>(v));
    } else {
      const double q = std::round(std::clamp(v, -1.0, 32767.0 / 32768.0) * 32768.0);
      put(static_cast<std::int16_t>(q));
    }
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write wav file " + path.string());
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw DataError("failed writing wav file " + path.string());
}

}  // namespace psenh
