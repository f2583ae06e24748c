// Copyright 2026 The psenh Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "psenh/stft.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <numbers>
#include <string>

#include "psenh/errors.hpp"

namespace psenh {

namespace {

// FFTW planning is not thread-safe; execution with new arrays is.
std::mutex &planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwBuffer {
  explicit FftwBuffer(std::size_t n) : real(fftw_alloc_real(n)), cplx(fftw_alloc_complex(n / 2 + 1)) {}
  ~FftwBuffer() {
    fftw_free(real);
    fftw_free(cplx);
  }
  FftwBuffer(const FftwBuffer &) = delete;
  FftwBuffer &operator=(const FftwBuffer &) = delete;
  double *real;
  fftw_complex *cplx;
};

}  // namespace

struct Stft::Plans {
  fftw_plan forward = nullptr;
  fftw_plan inverse = nullptr;
  explicit Plans(int n) {
    FftwBuffer buf(static_cast<std::size_t>(n));
    std::lock_guard lock(planner_mutex());
    forward = fftw_plan_dft_r2c_1d(n, buf.real, buf.cplx, FFTW_ESTIMATE);
    inverse = fftw_plan_dft_c2r_1d(n, buf.cplx, buf.real, FFTW_ESTIMATE);
  }
  ~Plans() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(forward);
    fftw_destroy_plan(inverse);
  }
};

Stft::Stft(int window_size) : window_size_(window_size), hop_(window_size / 4) {
  if (window_size < 8 || window_size % 4 != 0) {
    throw ConfigError("STFT window size must be a multiple of 4 and at least 8");
  }
  window_.resize(window_size_);
  // Periodic Hann: sums of squares are constant at 75% overlap.
  for (int n = 0; n < window_size_; ++n) {
    window_[n] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * n / window_size_);
  }
  plans_ = std::make_shared<const Plans>(window_size_);
}

int Stft::num_frames(std::size_t length) const {
  return 1 + static_cast<int>(length / static_cast<std::size_t>(hop_));
}

Spectrogram Stft::analyze(std::span<const double> x) const {
  if (x.size() < static_cast<std::size_t>(window_size_)) {
    throw ShapeError("stft: clip of " + std::to_string(x.size()) +
                     " samples is shorter than the " + std::to_string(window_size_) +
                     "-sample window");
  }
  const int pad = window_size_ / 2;
  Spectrogram spec;
  spec.window_size = window_size_;
  spec.hop = hop_;
  spec.num_frames = num_frames(x.size());
  spec.num_bins = num_bins();
  spec.frames.resize(std::size_t(spec.num_frames) * spec.num_bins);

  FftwBuffer buf(window_size_);
  const auto len = static_cast<long>(x.size());
  for (int t = 0; t < spec.num_frames; ++t) {
    const long start = static_cast<long>(t) * hop_ - pad;
    for (int n = 0; n < window_size_; ++n) {
      const long p = start + n;
      buf.real[n] = (p >= 0 && p < len) ? window_[n] * x[p] : 0.0;
    }
    fftw_execute_dft_r2c(plans_->forward, buf.real, buf.cplx);
    for (int k = 0; k < spec.num_bins; ++k) {
      spec.at(t, k) = {buf.cplx[k][0], buf.cplx[k][1]};
    }
  }
  return spec;
}

std::vector<double> Stft::inverse_envelope(int frames) const {
  const std::size_t padded = std::size_t(frames - 1) * hop_ + window_size_;
  std::vector<double> env(padded, 0.0);
  for (int t = 0; t < frames; ++t) {
    for (int n = 0; n < window_size_; ++n) {
      env[std::size_t(t) * hop_ + n] += window_[n] * window_[n];
    }
  }
  for (double &e : env) e = e > 0.0 ? 1.0 / e : 0.0;
  return env;
}

AudioClip Stft::synthesize(const Spectrogram &spec, std::size_t length,
                           int sample_rate) const {
  if (spec.window_size != window_size_ || spec.hop != hop_ ||
      spec.num_bins != num_bins() ||
      spec.frames.size() != std::size_t(spec.num_frames) * spec.num_bins) {
    throw ShapeError("istft: spectrogram does not match the STFT configuration");
  }
  const int pad = window_size_ / 2;
  const auto env = inverse_envelope(spec.num_frames);
  std::vector<double> acc(env.size(), 0.0);
  FftwBuffer buf(window_size_);
  const double scale = 1.0 / window_size_;
  for (int t = 0; t < spec.num_frames; ++t) {
    for (int k = 0; k < spec.num_bins; ++k) {
      buf.cplx[k][0] = spec.at(t, k).real();
      buf.cplx[k][1] = spec.at(t, k).imag();
    }
    fftw_execute_dft_c2r(plans_->inverse, buf.cplx, buf.real);
    const std::size_t start = std::size_t(t) * hop_;
    for (int n = 0; n < window_size_; ++n) {
      acc[start + n] += window_[n] * buf.real[n] * scale;
    }
  }
  AudioClip out;
  out.sample_rate = sample_rate;
  out.samples.assign(length, 0.0);
  for (std::size_t i = 0; i < length; ++i) {
    const std::size_t p = i + pad;
    if (p < acc.size()) out.samples[i] = acc[p] * env[p];
  }
  return out;
}

RatioMask Stft::mask_gradient(const Spectrogram &mixture,
                              std::span<const double> grad_output) const {
  const int pad = window_size_ / 2;
  const auto env = inverse_envelope(mixture.num_frames);
  RatioMask grad;
  grad.num_frames = mixture.num_frames;
  grad.num_bins = mixture.num_bins;
  grad.values.assign(mixture.frames.size(), 0.0);
  FftwBuffer buf(window_size_);
  const auto len = static_cast<long>(grad_output.size());
  const int nyquist = window_size_ / 2;
  for (int t = 0; t < mixture.num_frames; ++t) {
    const long start = static_cast<long>(t) * hop_;
    for (int n = 0; n < window_size_; ++n) {
      const long p = start + n;
      const long i = p - pad;
      buf.real[n] = (i >= 0 && i < len) ? window_[n] * grad_output[i] * env[p] : 0.0;
    }
    fftw_execute_dft_r2c(plans_->forward, buf.real, buf.cplx);
    for (int k = 0; k < mixture.num_bins; ++k) {
      const double weight = (k == 0 || k == nyquist) ? 1.0 : 2.0;
      const std::complex<double> g{buf.cplx[k][0], buf.cplx[k][1]};
      grad.at(t, k) = weight / window_size_ * (mixture.at(t, k) * std::conj(g)).real();
    }
  }
  return grad;
}

Spectrogram apply_mask(const Spectrogram &mixture, const RatioMask &mask) {
  if (mask.num_frames != mixture.num_frames || mask.num_bins != mixture.num_bins ||
      mask.values.size() != mixture.frames.size()) {
    throw ShapeError("apply_mask: mask is " + std::to_string(mask.num_frames) + "x" +
                     std::to_string(mask.num_bins) + " but spectrogram is " +
                     std::to_string(mixture.num_frames) + "x" +
                     std::to_string(mixture.num_bins));
  }
  Spectrogram out = mixture;
  for (std::size_t i = 0; i < out.frames.size(); ++i) out.frames[i] *= mask.values[i];
  return out;
}

RatioMask oracle_ratio_mask(const Spectrogram &speech, const Spectrogram &noise) {
  if (speech.frames.size() != noise.frames.size()) {
    throw ShapeError("oracle_ratio_mask: spectrogram shapes differ");
  }
  RatioMask m;
  m.num_frames = speech.num_frames;
  m.num_bins = speech.num_bins;
  m.values.resize(speech.frames.size());
  for (std::size_t i = 0; i < m.values.size(); ++i) {
    const double s = std::abs(speech.frames[i]);
    const double n = std::abs(noise.frames[i]);
    m.values[i] = (s + n) > 0.0 ? s / (s + n) : 0.0;
  }
  return m;
}

}  // namespace psenh
