// Copyright 2026 The psenh Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <set>
#include <string>
#include <vector>

#include "psenh/audio.hpp"
#include "psenh/manifest.hpp"

namespace psenh {

// An audio clip tagged with the corpus id it came from.
struct TaggedClip {
  std::string id;
  AudioClip clip;
};

using ClipPool = std::vector<TaggedClip>;

// Loads every entry (ids are manifest paths). Throws DataError when a file's
// sample rate disagrees with the manifest.
ClipPool load_pool(const CorpusManifest &manifest, const std::vector<ManifestEntry> &entries);

std::set<std::string> pool_ids(const ClipPool &pool);
double pool_duration_sec(const ClipPool &pool);

}  // namespace psenh
