// Copyright 2026 The psenh Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <span>

#include "psenh/audio.hpp"
#include "psenh/rng.hpp"

namespace psenh {

double energy(std::span<const double> x);
double rms(std::span<const double> x);

// 20 log10(rms(target) / rms(interference)).
double snr_db(std::span<const double> target, std::span<const double> interference);

struct MixResult {
  AudioClip mixture;
  AudioClip scaled_interference;
  double gain = 0.0;  // applied to the interference
};

// mixture = target + gain * interference, gain chosen so the RMS SNR of
// target against the scaled interference equals snr_db.
MixResult mix_at_snr(const AudioClip &target, const AudioClip &interference,
                     double snr_db);

std::size_t samples_for(double duration_sec, int sample_rate);

// Contiguous segment of round(duration * rate) samples at a uniform offset.
// Throws DataError if the source is too short; callers are expected to have
// dropped such clips when the manifest was built.
AudioClip random_clip(const AudioClip &source, double duration_sec, Rng &rng);

// Same, returning the drawn offset as well.
AudioClip random_clip(const AudioClip &source, double duration_sec, Rng &rng,
                      std::size_t &offset);

}  // namespace psenh
