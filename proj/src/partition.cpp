// Copyright 2026 The psenh Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "psenh/partition.hpp"

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>
#include <set>

#include "psenh/errors.hpp"
#include "psenh/rng.hpp"

namespace psenh {

namespace {

double total_sec(const std::vector<ManifestEntry> &v) {
  double t = 0.0;
  for (const auto &e : v) t += e.duration_sec;
  return t;
}

// Durations come from float headers; a budget of 3 s must admit 3.0000001 s.
constexpr double kBudgetSlack = 1e-6;

}  // namespace

bool is_allowed_budget(double seconds) {
  return std::any_of(kFinetuneBudgets.begin(), kFinetuneBudgets.end(),
                     [&](double b) { return b == seconds; });
}

double SpeakerSplit::finetune_sec() const { return total_sec(finetune); }
double SpeakerSplit::test_sec() const { return total_sec(test); }

SpeakerPartition partition_speakers(const CorpusManifest &manifest,
                                    const std::vector<std::string> &test_speaker_ids,
                                    double ft_budget_sec, std::uint64_t seed,
                                    const PartitionOptions &opts) {
  if (ft_budget_sec < 0.0 || ft_budget_sec >= kMaxFinetuneSec) {
    throw ConfigError("finetune budget must be in [0, 180) s, got " +
                      std::to_string(ft_budget_sec));
  }
  const std::set<std::string> test_ids(test_speaker_ids.begin(), test_speaker_ids.end());
  if (test_ids.size() != test_speaker_ids.size()) {
    throw ConfigError("duplicate test speaker ids");
  }

  SpeakerPartition out;
  out.seed = seed;
  out.ft_budget_sec = ft_budget_sec;
  std::map<std::string, std::vector<ManifestEntry>> by_speaker;
  for (const auto &e : manifest.entries) {
    if (e.corpus_tag == corpus_tag::kSpeech) {
      if (test_ids.count(e.speaker_id)) {
        by_speaker[e.speaker_id].push_back(e);
      } else {
        out.general.push_back(e);
      }
    } else if (e.corpus_tag == corpus_tag::kNoiseTrain) {
      out.noise_train.push_back(e);
    } else if (e.corpus_tag == corpus_tag::kNoiseTest) {
      out.noise_test.push_back(e);
    } else if (e.corpus_tag == corpus_tag::kNoisePremix) {
      out.noise_premix.push_back(e);
    }
  }

  for (const auto &id : test_speaker_ids) {
    auto it = by_speaker.find(id);
    if (it == by_speaker.end()) throw DataError("test speaker '" + id + "' has no utterances");
    auto utts = it->second;
    std::sort(utts.begin(), utts.end(),
              [](const auto &a, const auto &b) { return a.path < b.path; });
    const double available = total_sec(utts);
    if (available < ft_budget_sec + opts.min_test_sec) {
      throw DataError("test speaker '" + id + "' has " + std::to_string(available) +
                      " s of speech; need " + std::to_string(ft_budget_sec) +
                      " s for finetuning plus " + std::to_string(opts.min_test_sec) +
                      " s for evaluation");
    }
    Rng rng(derive_seed(seed, {hash_name("partition"), hash_name(id)}));
    std::shuffle(utts.begin(), utts.end(), rng);

    SpeakerSplit split;
    split.speaker_id = id;
    double ft = 0.0;
    double te = 0.0;
    for (auto &e : utts) {
      if (ft + e.duration_sec <= ft_budget_sec + kBudgetSlack) {
        ft += e.duration_sec;
        split.finetune.push_back(std::move(e));
      } else if (te + e.duration_sec < kMaxTestSec) {
        te += e.duration_sec;
        split.test.push_back(std::move(e));
      }
    }
    if (ft_budget_sec > 0.0 && split.finetune.empty()) {
      throw DataError("test speaker '" + id + "' has no utterance short enough for a " +
                      std::to_string(ft_budget_sec) + " s finetune budget");
    }
    if (split.test_sec() < opts.min_test_sec) {
      throw DataError("test speaker '" + id + "' keeps only " +
                      std::to_string(split.test_sec()) + " s of evaluation speech");
    }
    out.speakers.emplace(id, std::move(split));
  }
  return out;
}

std::vector<ManifestEntry> select_finetune_subset(const SpeakerSplit &split, double budget_sec) {
  std::vector<ManifestEntry> out;
  double total = 0.0;
  for (const auto &e : split.finetune) {
    if (total + e.duration_sec <= budget_sec + kBudgetSlack) {
      total += e.duration_sec;
      out.push_back(e);
    }
  }
  return out;
}

namespace {

nlohmann::json entries_json(const std::vector<ManifestEntry> &v) {
  nlohmann::json a = nlohmann::json::array();
  for (const auto &e : v) {
    a.push_back({{"path", e.path},
                 {"speaker_id", e.speaker_id},
                 {"duration_sec", e.duration_sec},
                 {"sample_rate", e.sample_rate},
                 {"corpus_tag", e.corpus_tag}});
  }
  return a;
}

std::vector<ManifestEntry> entries_from(const nlohmann::json &a) {
  std::vector<ManifestEntry> v;
  for (const auto &j : a) {
    v.push_back({j.at("path"), j.at("speaker_id"), j.at("duration_sec"), j.at("sample_rate"),
                 j.at("corpus_tag")});
  }
  return v;
}

}  // namespace

void to_json(nlohmann::json &j, const SpeakerPartition &p) {
  j = nlohmann::json::object();
  j["seed"] = p.seed;
  j["ft_budget_sec"] = p.ft_budget_sec;
  j["general"] = entries_json(p.general);
  j["noise_train"] = entries_json(p.noise_train);
  j["noise_test"] = entries_json(p.noise_test);
  j["noise_premix"] = entries_json(p.noise_premix);
  auto &s = j["speakers"] = nlohmann::json::object();
  for (const auto &[id, split] : p.speakers) {
    s[id] = {{"finetune", entries_json(split.finetune)}, {"test", entries_json(split.test)}};
  }
}

void from_json(const nlohmann::json &j, SpeakerPartition &p) {
  p.seed = j.at("seed");
  p.ft_budget_sec = j.at("ft_budget_sec");
  p.general = entries_from(j.at("general"));
  p.noise_train = entries_from(j.at("noise_train"));
  p.noise_test = entries_from(j.at("noise_test"));
  p.noise_premix = entries_from(j.at("noise_premix"));
  p.speakers.clear();
  for (const auto &[id, s] : j.at("speakers").items()) {
    SpeakerSplit split;
    split.speaker_id = id;
    split.finetune = entries_from(s.at("finetune"));
    split.test = entries_from(s.at("test"));
    p.speakers.emplace(id, std::move(split));
  }
}

}  // namespace psenh
