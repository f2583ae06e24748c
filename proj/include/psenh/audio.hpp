// Copyright 2026 The psenh Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace psenh {

inline constexpr int kSampleRate = 16000;

using Signal = std::vector<double>;

// Mono waveform in normalized floating point.
struct AudioClip {
  Signal samples;
  int sample_rate = kSampleRate;

  AudioClip() = default;
  explicit AudioClip(Signal s, int rate = kSampleRate)
      : samples(std::move(s)), sample_rate(rate) {}

  std::size_t size() const { return samples.size(); }
  double duration_sec() const {
    return static_cast<double>(samples.size()) / sample_rate;
  }
  std::span<const double> view() const { return samples; }

  bool operator==(const AudioClip &) const = default;
};

// Throws DataError when the clip is empty or holds NaN/Inf.
void validate_clip(const AudioClip &clip);

enum class WavEncoding { kPcm16, kFloat32 };

// Reads mono 16-bit PCM or 32-bit float little-endian WAV.
AudioClip read_wav(const std::filesystem::path &path);

void write_wav(const std::filesystem::path &path, const AudioClip &clip,
               WavEncoding encoding = WavEncoding::kFloat32);

// Duration from the header only; does not read sample data.
struct WavInfo {
  int sample_rate = 0;
  int channels = 0;
  int bits_per_sample = 0;
  std::size_t num_samples = 0;
};
WavInfo probe_wav(const std::filesystem::path &path);

}  // namespace psenh
