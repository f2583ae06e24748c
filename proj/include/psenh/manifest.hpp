// Copyright 2026 The psenh Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "psenh/audio.hpp"

namespace psenh {

// Roles a corpus entry can play.
namespace corpus_tag {
inline constexpr const char *kSpeech = "speech";
inline constexpr const char *kNoiseTrain = "noise-train";
inline constexpr const char *kNoiseTest = "noise-test";
inline constexpr const char *kNoisePremix = "noise-premix";
}  // namespace corpus_tag

struct ManifestEntry {
  std::string path;
  std::string speaker_id;
  double duration_sec = 0.0;
  int sample_rate = kSampleRate;
  std::string corpus_tag;

  bool operator==(const ManifestEntry &) const = default;
};

struct CorpusManifest {
  std::vector<ManifestEntry> entries;
  // Directory relative paths are resolved against; not serialized.
  std::filesystem::path base_dir;

  std::filesystem::path resolve(const ManifestEntry &e) const;
  bool operator==(const CorpusManifest &o) const { return entries == o.entries; }
};

// Throws DataError listing every offending entry: non-positive duration,
// duplicate path, unknown tag, speech without speaker, or mixed sample rates.
void validate_manifest(const CorpusManifest &m);

// JSON Lines, one entry per line.
CorpusManifest parse_manifest(std::istream &in, const std::string &origin = "<stream>");
CorpusManifest load_manifest(const std::filesystem::path &path);
void write_manifest(std::ostream &out, const CorpusManifest &m);
void save_manifest(const CorpusManifest &m, const std::filesystem::path &path);

struct ScanOptions {
  double min_duration_sec = 1.0;
};

struct ScanResult {
  CorpusManifest manifest;
  std::vector<std::string> warnings;
};

// Walks <root>/<corpus_tag>/[<speaker_id>/]...*.wav. Paths are stored
// relative to root; files shorter than min_duration_sec are skipped with a
// warning. Entries are sorted by path so reruns are byte-identical.
ScanResult scan_corpus(const std::filesystem::path &root, const ScanOptions &opts = {});

}  // namespace psenh
