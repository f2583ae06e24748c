// Copyright 2026 The psenh Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "psenh/model.hpp"
#include "psenh/sampler.hpp"

namespace psenh {

// How evaluation mixtures are drawn. Two reports are comparable only when
// their protocols are equal.
struct EvalProtocol {
  int n_mixtures = 100;
  SnrRange snr;
  double clip_sec = kClipSec;

  bool operator==(const EvalProtocol &) const = default;
};

void to_json(nlohmann::json &j, const EvalProtocol &p);
void from_json(const nlohmann::json &j, EvalProtocol &p);

// Frozen per (speaker, seed): every model scored for that speaker and seed
// sees identical audio. Throws DataError for an empty speech or noise set.
std::vector<TrainingExample> build_eval_mixtures(const ClipPool &clean_test,
                                                 const ClipPool &noise_test,
                                                 const EvalProtocol &protocol,
                                                 const std::string &speaker_id,
                                                 std::uint64_t seed);

struct SpeakerStats {
  std::string speaker_id;
  std::uint64_t seed = 0;
  double mean_sisdri_db = 0.0;
  double std_sisdri_db = 0.0;  // population std over mixtures
  int n_mixtures = 0;

  bool operator==(const SpeakerStats &) const = default;
};

void to_json(nlohmann::json &j, const SpeakerStats &s);
void from_json(const nlohmann::json &j, SpeakerStats &s);

// Mean and population std of a sample.
std::pair<double, double> mean_std(const std::vector<double> &values);

// Per-mixture SI-SDR improvements of an arbitrary enhancer.
using ExampleEnhancer = std::function<Signal(const TrainingExample &)>;
std::vector<double> score_mixtures(const ExampleEnhancer &enhance,
                                   const std::vector<TrainingExample> &mixtures);
std::vector<double> score_mixtures(const EnhancementModel &model,
                                   const std::vector<TrainingExample> &mixtures);

SpeakerStats summarize(const std::string &speaker_id, std::uint64_t seed,
                       const std::vector<double> &improvements);

SpeakerStats evaluate_speaker(const EnhancementModel &model, const ClipPool &clean_test,
                              const ClipPool &noise_test, const EvalProtocol &protocol,
                              const std::string &speaker_id, std::uint64_t seed);

// One grid cell: architecture x scheme x premixture SNR x finetune budget.
struct GridKey {
  std::string architecture;
  std::string scheme;
  std::optional<double> premix_snr_db;
  double ft_budget_sec = 0.0;

  auto operator<=>(const GridKey &) const = default;
  bool operator==(const GridKey &) const = default;
};

void to_json(nlohmann::json &j, const GridKey &k);
void from_json(const nlohmann::json &j, GridKey &k);

// Per-speaker results of one model configuration.
struct CellReport {
  GridKey key;
  EvalProtocol protocol;
  std::vector<SpeakerStats> speakers;
};

void to_json(nlohmann::json &j, const CellReport &r);
void from_json(const nlohmann::json &j, CellReport &r);

struct GridCell {
  double mean_sisdri_db = 0.0;  // mean over speakers of per-speaker means
  double std_sisdri_db = 0.0;   // population std over speakers
  int n_speakers = 0;
  // Per speaker: mean over seeds of the per-seed means.
  std::map<std::string, double> speaker_means;
  std::vector<SpeakerStats> speakers;  // sorted by (speaker, seed)

  bool operator==(const GridCell &) const = default;
};

struct Grid {
  EvalProtocol protocol;
  std::map<GridKey, GridCell> cells;

  bool operator==(const Grid &) const = default;
};

void to_json(nlohmann::json &j, const Grid &g);
void from_json(const nlohmann::json &j, Grid &g);

// Pools the speakers of reports sharing a key, then aggregates each cell.
// Seeds of one speaker are averaged first; the cell's mean and std are over
// speakers. Throws DataError on mismatched protocols or a duplicated
// (speaker, seed) within a cell.
Grid aggregate_grid(const std::vector<CellReport> &reports);

}  // namespace psenh
