// Copyright 2026 The psenh Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "psenh/pairing.hpp"

#include "psenh/errors.hpp"
#include "psenh/mixing.hpp"

namespace psenh {

namespace {

std::string item_of(const std::string &tagged) { return tagged.substr(0, tagged.rfind('@')); }

constexpr int kMaxRedraws = 64;

}  // namespace

std::vector<const AudioClip *> PairBatch::inputs() const {
  std::vector<const AudioClip *> v;
  v.reserve(2 * (positives.size() + negatives.size()));
  for (const auto &p : positives) {
    v.push_back(&p.x1);
    v.push_back(&p.x2);
  }
  for (const auto &n : negatives) {
    v.push_back(&n.x1);
    v.push_back(&n.x2);
  }
  return v;
}

std::vector<const AudioClip *> PairBatch::targets() const {
  std::vector<const AudioClip *> v;
  v.reserve(2 * (positives.size() + negatives.size()));
  for (const auto &p : positives) {
    v.push_back(&p.s_tilde.clip);
    v.push_back(&p.s_tilde.clip);
  }
  for (const auto &n : negatives) {
    v.push_back(&n.s1_tilde.clip);
    v.push_back(&n.s2_tilde.clip);
  }
  return v;
}

PositivePair make_positive_pair(const TaggedClip &s_tilde, const TaggedClip &n1,
                                const TaggedClip &n2, double snr1_db, double snr2_db) {
  if (n1.id == n2.id || n1.clip.samples == n2.clip.samples) {
    throw DataError("positive pair needs two distinct noise segments, got '" + n1.id +
                    "' twice");
  }
  PositivePair p;
  p.s_tilde = s_tilde;
  auto m1 = mix_at_snr(s_tilde.clip, n1.clip, snr1_db);
  auto m2 = mix_at_snr(s_tilde.clip, n2.clip, snr2_db);
  p.x1 = std::move(m1.mixture);
  p.x2 = std::move(m2.mixture);
  p.scaled_n1 = std::move(m1.scaled_interference);
  p.scaled_n2 = std::move(m2.scaled_interference);
  p.n1_id = n1.id;
  p.n2_id = n2.id;
  p.snr1_db = snr1_db;
  p.snr2_db = snr2_db;
  return p;
}

NegativePair make_negative_pair(const TaggedClip &s1_tilde, const TaggedClip &s2_tilde,
                                const TaggedClip &noise, double snr_db) {
  if (item_of(s1_tilde.id) == item_of(s2_tilde.id)) {
    throw DataError("negative pair needs two different premixture items, got '" +
                    item_of(s1_tilde.id) + "' twice");
  }
  if (s1_tilde.clip.size() != s2_tilde.clip.size()) {
    throw ShapeError("negative pair sources differ in length");
  }
  NegativePair p;
  auto m1 = mix_at_snr(s1_tilde.clip, noise.clip, snr_db);
  p.scaled_noise = std::move(m1.scaled_interference);
  p.x1 = std::move(m1.mixture);
  p.x2.sample_rate = s2_tilde.clip.sample_rate;
  p.x2.samples.resize(s2_tilde.clip.size());
  for (std::size_t i = 0; i < p.x2.samples.size(); ++i) {
    p.x2.samples[i] = s2_tilde.clip.samples[i] + p.scaled_noise.samples[i];
  }
  p.s1_tilde = s1_tilde;
  p.s2_tilde = s2_tilde;
  p.n_id = noise.id;
  p.snr_db = snr_db;
  return p;
}

PairBatch build_pair_batch(const PremixtureSet &premixtures, const ClipPool &noise, int pair_count,
                           const SnrRange &snr, double clip_sec, Rng &rng) {
  if (premixtures.size() < 2) {
    throw DataError("contrastive pairs need at least 2 premixture items, have " +
                    std::to_string(premixtures.size()));
  }
  if (pair_count < 1) throw ConfigError("pair count must be positive");
  if (noise.empty()) throw DataError("contrastive pairs need a nonempty noise set");
  const ClipPool &pool = premixtures.as_pool();

  auto distinct_noise = [&](const TaggedClip &other) {
    for (int attempt = 0; attempt < kMaxRedraws; ++attempt) {
      TaggedClip n = draw_clip(noise, clip_sec, rng);
      if (n.id != other.id) return n;
    }
    throw DataError("could not draw two distinct noise segments");
  };

  PairBatch batch;
  batch.positives.reserve(pair_count);
  batch.negatives.reserve(pair_count);
  for (int t = 0; t < pair_count; ++t) {
    TaggedClip s = draw_clip(pool, clip_sec, rng);
    TaggedClip n1 = draw_clip(noise, clip_sec, rng);
    TaggedClip n2 = distinct_noise(n1);
    const double snr1 = uniform(rng, snr.lo_db, snr.hi_db);
    const double snr2 = uniform(rng, snr.lo_db, snr.hi_db);
    batch.positives.push_back(make_positive_pair(s, n1, n2, snr1, snr2));
  }
  for (int t = 0; t < pair_count; ++t) {
    TaggedClip s1 = draw_clip(pool, clip_sec, rng);
    TaggedClip s2;
    int attempt = 0;
    do {
      s2 = draw_clip(pool, clip_sec, rng);
    } while (item_of(s2.id) == item_of(s1.id) && ++attempt < kMaxRedraws);
    if (item_of(s2.id) == item_of(s1.id)) {
      throw DataError("could not draw two different premixture items");
    }
    TaggedClip n = draw_clip(noise, clip_sec, rng);
    const double snr_db = uniform(rng, snr.lo_db, snr.hi_db);
    batch.negatives.push_back(make_negative_pair(s1, s2, n, snr_db));
  }
  return batch;
}

}  // namespace psenh
