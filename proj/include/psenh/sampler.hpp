// Copyright 2026 The psenh Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <string>
#include <vector>

#include "psenh/clip_pool.hpp"
#include "psenh/premixture.hpp"
#include "psenh/rng.hpp"

namespace psenh {

struct SnrRange {
  double lo_db = -5.0;
  double hi_db = 5.0;
  bool operator==(const SnrRange &) const = default;
};

inline constexpr double kClipSec = 1.0;

// One (input, target) training or evaluation mixture.
struct TrainingExample {
  AudioClip input;             // target + scaled noise
  AudioClip target;
  AudioClip scaled_noise;
  std::string source_id;       // speech utterance (or premixture) id
  std::string noise_id;        // "<noise id>@<offset>"
  double snr_db = 0.0;
};

// A random clip of clip_sec from `pool`, redrawn (bounded) when silent.
TaggedClip draw_clip(const ClipPool &pool, double clip_sec, Rng &rng);

// Mixes a random speech clip with a random noise clip at an SNR drawn
// uniformly from `snr`.
TrainingExample draw_mixture(const ClipPool &speech, const ClipPool &noise,
                             const SnrRange &snr, double clip_sec, Rng &rng);

std::vector<TrainingExample> sample_supervised_batch(const ClipPool &speech,
                                                     const ClipPool &noise, int batch_size,
                                                     const SnrRange &snr, double clip_sec,
                                                     Rng &rng);

// Noise injection on top of premixtures: targets are the premixed clips.
std::vector<TrainingExample> sample_pseudose_batch(const PremixtureSet &premixtures,
                                                   const ClipPool &noise, int batch_size,
                                                   const SnrRange &snr, double clip_sec,
                                                   Rng &rng);

}  // namespace psenh
