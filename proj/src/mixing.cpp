// Copyright 2026 The psenh Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "psenh/mixing.hpp"

#include <cmath>
#include <string>

#include "psenh/errors.hpp"

namespace psenh {

double energy(std::span<const double> x) {
  double e = 0.0;
  for (double v : x) e += v * v;
  return e;
}

double rms(std::span<const double> x) {
  if (x.empty()) return 0.0;
  return std::sqrt(energy(x) / static_cast<double>(x.size()));
}

double snr_db(std::span<const double> target, std::span<const double> interference) {
  return 20.0 * std::log10(rms(target) / rms(interference));
}

MixResult mix_at_snr(const AudioClip &target, const AudioClip &interference,
                     double snr) {
  if (target.size() != interference.size()) {
    throw ShapeError("mix_at_snr: length mismatch (" + std::to_string(target.size()) +
                     " vs " + std::to_string(interference.size()) + ")");
  }
  if (target.sample_rate != interference.sample_rate) {
    throw ShapeError("mix_at_snr: sample rate mismatch");
  }
  const double rs = rms(target.samples);
  const double rn = rms(interference.samples);
  if (rs == 0.0) throw ZeroEnergyError("mix_at_snr: target has zero energy");
  if (rn == 0.0) throw ZeroEnergyError("mix_at_snr: interference has zero energy");

  MixResult out;
  out.gain = rs / (rn * std::pow(10.0, snr / 20.0));
  const std::size_t n = target.size();
  out.scaled_interference.sample_rate = target.sample_rate;
  out.mixture.sample_rate = target.sample_rate;
  out.scaled_interference.samples.resize(n);
  out.mixture.samples.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double scaled = out.gain * interference.samples[i];
    out.scaled_interference.samples[i] = scaled;
    out.mixture.samples[i] = target.samples[i] + scaled;
  }
  return out;
}

std::size_t samples_for(double duration_sec, int sample_rate) {
  return static_cast<std::size_t>(std::llround(duration_sec * sample_rate));
}

AudioClip random_clip(const AudioClip &source, double duration_sec, Rng &rng,
                      std::size_t &offset) {
  const std::size_t n = samples_for(duration_sec, source.sample_rate);
  if (n == 0) throw DataError("random_clip: requested duration is zero");
  if (source.size() < n) {
    throw DataError("random_clip: source has " + std::to_string(source.size()) +
                    " samples but " + std::to_string(n) +
                    " were requested; loop-pad or reject the clip when building "
                    "the manifest");
  }
  offset = std::uniform_int_distribution<std::size_t>(0, source.size() - n)(rng);
  AudioClip out;
  out.sample_rate = source.sample_rate;
  out.samples.assign(source.samples.begin() + static_cast<std::ptrdiff_t>(offset),
                     source.samples.begin() + static_cast<std::ptrdiff_t>(offset + n));
  return out;
}

AudioClip random_clip(const AudioClip &source, double duration_sec, Rng &rng) {
  std::size_t offset = 0;
  return random_clip(source, duration_sec, rng, offset);
}

}  // namespace psenh
