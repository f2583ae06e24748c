// Copyright 2026 The psenh Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "psenh/sampler.hpp"

#include "psenh/errors.hpp"
#include "psenh/mixing.hpp"

namespace psenh {

namespace {
constexpr int kMaxRedraws = 64;
}

TaggedClip draw_clip(const ClipPool &pool, double clip_sec, Rng &rng) {
  if (pool.empty()) throw DataError("cannot draw a clip from an empty set");
  for (int attempt = 0; attempt < kMaxRedraws; ++attempt) {
    const auto &src = pool[std::uniform_int_distribution<std::size_t>(0, pool.size() - 1)(rng)];
    std::size_t offset = 0;
    AudioClip clip = random_clip(src.clip, clip_sec, rng, offset);
    if (rms(clip.samples) > 0.0) return {src.id + "@" + std::to_string(offset), std::move(clip)};
  }
  throw DataError("could not draw a non-silent clip after repeated attempts");
}

namespace {

// Strips the "@offset" suffix added by draw_clip.
std::string base_id(const std::string &tagged) {
  return tagged.substr(0, tagged.rfind('@'));
}

}  // namespace

TrainingExample draw_mixture(const ClipPool &speech, const ClipPool &noise,
                             const SnrRange &snr, double clip_sec, Rng &rng) {
  TaggedClip s = draw_clip(speech, clip_sec, rng);
  TaggedClip n = draw_clip(noise, clip_sec, rng);
  TrainingExample ex;
  ex.snr_db = uniform(rng, snr.lo_db, snr.hi_db);
  auto mix = mix_at_snr(s.clip, n.clip, ex.snr_db);
  ex.input = std::move(mix.mixture);
  ex.scaled_noise = std::move(mix.scaled_interference);
  ex.target = std::move(s.clip);
  ex.source_id = base_id(s.id);
  ex.noise_id = std::move(n.id);
  return ex;
}

std::vector<TrainingExample> sample_supervised_batch(const ClipPool &speech,
                                                     const ClipPool &noise, int batch_size,
                                                     const SnrRange &snr, double clip_sec,
                                                     Rng &rng) {
  if (speech.empty()) throw DataError("sample_supervised_batch: empty speech set");
  if (noise.empty()) throw DataError("sample_supervised_batch: empty noise set");
  if (batch_size < 1) throw ConfigError("batch size must be positive");
  std::vector<TrainingExample> batch;
  batch.reserve(batch_size);
  for (int i = 0; i < batch_size; ++i) batch.push_back(draw_mixture(speech, noise, snr, clip_sec, rng));
  return batch;
}

std::vector<TrainingExample> sample_pseudose_batch(const PremixtureSet &premixtures,
                                                   const ClipPool &noise, int batch_size,
                                                   const SnrRange &snr, double clip_sec,
                                                   Rng &rng) {
  return sample_supervised_batch(premixtures.as_pool(), noise, batch_size, snr, clip_sec, rng);
}

}  // namespace psenh
