// Copyright 2026 The psenh Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "psenh/manifest.hpp"

namespace psenh {

// Upper bounds on a test speaker's clean material.
inline constexpr double kMaxFinetuneSec = 180.0;
inline constexpr double kMaxTestSec = 1320.0;

// Finetuning budgets a run may request, in seconds.
inline const std::vector<double> kFinetuneBudgets = {0, 3, 5, 10, 30, 60};
bool is_allowed_budget(double seconds);

struct SpeakerSplit {
  std::string speaker_id;
  // Whole utterances chosen greedily (shuffled order) under the budget. Any
  // smaller budget selects a prefix-greedy subset of this list.
  std::vector<ManifestEntry> finetune;
  // Held clean set; only premixing and evaluation may read its audio.
  std::vector<ManifestEntry> test;

  double finetune_sec() const;
  double test_sec() const;
};

struct SpeakerPartition {
  std::uint64_t seed = 0;
  double ft_budget_sec = 0.0;
  std::vector<ManifestEntry> general;  // G: non-test speakers
  std::map<std::string, SpeakerSplit> speakers;
  std::vector<ManifestEntry> noise_train;   // N_tr
  std::vector<ManifestEntry> noise_test;    // N_te
  std::vector<ManifestEntry> noise_premix;  // N_pm
};

struct PartitionOptions {
  // Clean speech that must remain for S_te after the finetune budget.
  double min_test_sec = 10.0;
};

// Deterministic split of a manifest given the seed. Throws DataError naming
// the speaker when it lacks material, ConfigError for budgets >= 180 s.
SpeakerPartition partition_speakers(const CorpusManifest &manifest,
                                    const std::vector<std::string> &test_speaker_ids,
                                    double ft_budget_sec, std::uint64_t seed,
                                    const PartitionOptions &opts = {});

// Greedy subset of the split's finetune list under a (smaller) budget.
std::vector<ManifestEntry> select_finetune_subset(const SpeakerSplit &split, double budget_sec);

void to_json(nlohmann::json &j, const SpeakerPartition &p);
void from_json(const nlohmann::json &j, SpeakerPartition &p);

}  // namespace psenh
