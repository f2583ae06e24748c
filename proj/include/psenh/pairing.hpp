// Copyright 2026 The psenh Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <string>
#include <vector>

#include "psenh/clip_pool.hpp"
#include "psenh/premixture.hpp"
#include "psenh/rng.hpp"
#include "psenh/sampler.hpp"

namespace psenh {

// Two mixtures of one pseudo-source with different noises.
struct PositivePair {
  TaggedClip s_tilde;
  AudioClip x1, x2;
  AudioClip scaled_n1, scaled_n2;
  std::string n1_id, n2_id;
  double snr1_db = 0.0, snr2_db = 0.0;
};

// Two pseudo-sources under one shared noise realization.
struct NegativePair {
  TaggedClip s1_tilde, s2_tilde;
  AudioClip x1, x2;
  AudioClip scaled_noise;
  std::string n_id;
  double snr_db = 0.0;
};

struct PairBatch {
  std::vector<PositivePair> positives;
  std::vector<NegativePair> negatives;

  int pair_count() const { return static_cast<int>(positives.size()); }
  // x1, x2 of every positive pair, then x1, x2 of every negative pair.
  std::vector<const AudioClip *> inputs() const;
  // Matching targets for inputs(): s~ twice per positive, s~1 and s~2 per negative.
  std::vector<const AudioClip *> targets() const;
};

// x_i = s~ + scaled n_i at snr_i. Throws DataError when the two noise draws
// are the same segment.
PositivePair make_positive_pair(const TaggedClip &s_tilde, const TaggedClip &n1,
                                const TaggedClip &n2, double snr1_db, double snr2_db);

// The noise is scaled once against s~1's RMS at snr_db and added verbatim to
// both sources. Throws DataError if both sides are the same premixture item.
NegativePair make_negative_pair(const TaggedClip &s1_tilde, const TaggedClip &s2_tilde,
                                const TaggedClip &noise, double snr_db);

// T positive and T negative pairs of clip_sec clips. Positive-pair SNRs are
// drawn per mixture, negative-pair SNRs once per pair.
PairBatch build_pair_batch(const PremixtureSet &premixtures, const ClipPool &noise, int pair_count,
                           const SnrRange &snr, double clip_sec, Rng &rng);

}  // namespace psenh
