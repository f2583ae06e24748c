// Copyright 2026 The psenh Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "psenh/clip_pool.hpp"

#include "psenh/errors.hpp"

namespace psenh {

ClipPool load_pool(const CorpusManifest &manifest, const std::vector<ManifestEntry> &entries) {
  ClipPool pool;
  pool.reserve(entries.size());
  for (const auto &e : entries) {
    AudioClip clip = read_wav(manifest.resolve(e));
    if (clip.sample_rate != e.sample_rate) {
      throw DataError(e.path + ": file sample rate " + std::to_string(clip.sample_rate) +
                      " does not match manifest " + std::to_string(e.sample_rate));
    }
    validate_clip(clip);
    pool.push_back({e.path, std::move(clip)});
  }
  return pool;
}

std::set<std::string> pool_ids(const ClipPool &pool) {
  std::set<std::string> ids;
  for (const auto &c : pool) ids.insert(c.id);
  return ids;
}

double pool_duration_sec(const ClipPool &pool) {
  double total = 0.0;
  for (const auto &c : pool) total += c.clip.duration_sec();
  return total;
}

}  // namespace psenh
