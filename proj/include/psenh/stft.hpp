// Copyright 2026 The psenh Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <complex>
#include <memory>
#include <span>
#include <vector>

#include "psenh/audio.hpp"

namespace psenh {

inline constexpr int kWindowSize = 1024;

// Row-major [num_frames x num_bins] complex frames.
struct Spectrogram {
  int window_size = kWindowSize;
  int hop = kWindowSize / 4;
  int num_frames = 0;
  int num_bins = 0;
  std::vector<std::complex<double>> frames;

  std::complex<double> &at(int t, int k) { return frames[std::size_t(t) * num_bins + k]; }
  const std::complex<double> &at(int t, int k) const {
    return frames[std::size_t(t) * num_bins + k];
  }
};

// Real gains in [0, 1], same layout as Spectrogram.
struct RatioMask {
  int num_frames = 0;
  int num_bins = 0;
  std::vector<double> values;

  double &at(int t, int k) { return values[std::size_t(t) * num_bins + k]; }
  double at(int t, int k) const { return values[std::size_t(t) * num_bins + k]; }
};

// Hann-windowed STFT with hop = window/4. Frames are centred: the signal is
// zero-padded by window/2 on both sides, so num_frames = 1 + length / hop.
// Synthesis divides the overlap-added frames by the summed squared window,
// which makes synthesize(analyze(x), len(x)) reproduce x over its full length.
// Instances are immutable after construction and safe to share across threads.
class Stft {
 public:
  explicit Stft(int window_size = kWindowSize);

  int window_size() const { return window_size_; }
  int hop() const { return hop_; }
  int num_bins() const { return window_size_ / 2 + 1; }
  int num_frames(std::size_t length) const;
  const std::vector<double> &window() const { return window_; }

  Spectrogram analyze(std::span<const double> x) const;
  Spectrogram analyze(const AudioClip &clip) const { return analyze(clip.view()); }

  AudioClip synthesize(const Spectrogram &spec, std::size_t length,
                       int sample_rate = kSampleRate) const;

  // Gradient of a scalar loss L(synthesize(apply_mask(mixture, M))) with
  // respect to the mask M, given dL/dy for the synthesized waveform y.
  RatioMask mask_gradient(const Spectrogram &mixture,
                          std::span<const double> grad_output) const;

 private:
  struct Plans;
  int window_size_;
  int hop_;
  std::vector<double> window_;
  std::shared_ptr<const Plans> plans_;

  // 1 / sum_t w^2[p - t*hop] over the padded time axis.
  std::vector<double> inverse_envelope(int num_frames) const;
};

// Element-wise product of mask and complex frames; mixture phase is kept.
Spectrogram apply_mask(const Spectrogram &mixture, const RatioMask &mask);

// |S| / (|S| + |N|), the oracle ratio mask of a two-source mixture.
RatioMask oracle_ratio_mask(const Spectrogram &speech, const Spectrogram &noise);

}  // namespace psenh
