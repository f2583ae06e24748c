// Copyright 2026 The psenh Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

#include "psenh/clip_pool.hpp"

namespace psenh {

// Passing this as the premixture SNR disables premixing: premixed == clean.
// Only meant for equivalence checks in tests.
inline constexpr double kPremixDisabled = std::numeric_limits<double>::infinity();

inline const std::vector<double> kDefaultPremixSnrs = {5.0, 10.0};

struct PremixtureItem {
  std::string id;              // "premix/<clean id>"
  std::string clean_ref_id;    // provenance only; the clean audio is not kept
  std::string premix_noise_id; // "<noise id>@<offset>"
  double premix_snr_db = 0.0;
  AudioClip premixed;
};

struct PremixOptions {
  double snr_db = 10.0;
  // Per-utterance SNR drawn uniformly in snr_db +- jitter_db.
  double jitter_db = 0.0;
  std::uint64_t seed = 0;
};

// The noisy recordings of one test speaker, frozen once built. Holds no
// clean audio: training code sees only the premixed signals.
class PremixtureSet {
 public:
  PremixtureSet() = default;

  const std::vector<PremixtureItem> &items() const { return items_; }
  std::size_t size() const { return items_.size(); }
  bool empty() const { return items_.empty(); }

  // Premixed clips keyed by premixture id.
  const ClipPool &as_pool() const { return pool_; }

  // WAV files (float32) plus index.json.
  void save(const std::filesystem::path &dir) const;
  static PremixtureSet load(const std::filesystem::path &dir);

  // Items [begin, end) as a new set, for train/validation splits.
  PremixtureSet slice(std::size_t begin, std::size_t end) const;
  PremixtureSet select(const std::vector<std::size_t> &indices) const;

 private:
  friend PremixtureSet build_premixture(const ClipPool &, const ClipPool &, const PremixOptions &);
  void index_pool();
  std::vector<PremixtureItem> items_;
  ClipPool pool_;
};

// One premixed clip per clean utterance; the noise segment (same length as
// the utterance, looped if the recording is shorter) is drawn with
// replacement at a random offset. Throws DataError for an empty noise set.
PremixtureSet build_premixture(const ClipPool &clean_test, const ClipPool &premix_noise,
                               const PremixOptions &opts);

}  // namespace psenh
