// Copyright 2026 The psenh Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "psenh/evaluator.hpp"
#include "psenh/model.hpp"
#include "psenh/synthetic.hpp"
#include "psenh/trainer.hpp"

namespace psenh {

struct CorpusSource {
  // Corpus tree; for a synthetic corpus, where it is generated (default:
  // <output_dir>/corpus).
  std::filesystem::path root;
  std::optional<std::filesystem::path> manifest;  // use instead of scanning root
  std::optional<SyntheticCorpusConfig> synthetic;
};

// A full experiment grid: every architecture x scheme x premixture SNR x
// finetune budget, for every seed. Training settings are JSON overlays on
// the per-architecture defaults so one file can serve several models.
struct ExperimentConfig {
  std::string name = "experiment";
  std::filesystem::path output_dir = "psenh-run";
  std::vector<std::uint64_t> seeds = {1};
  CorpusSource corpus;
  std::vector<std::string> test_speakers;  // empty: the synthetic test speakers
  std::vector<std::string> architectures = {"gru64"};
  std::vector<std::string> schemes = {scheme::kMultiSpeaker, scheme::kPseudoSe,
                                      scheme::kContrastive, scheme::kRandomInit};
  std::vector<double> premix_snr_db = {10.0};  // +inf: premixing disabled
  double premix_jitter_db = 0.0;
  std::vector<double> ft_budgets_sec = {0, 3, 5, 10, 30, 60};
  nlohmann::json pretrain = nlohmann::json::object();
  nlohmann::json finetune = nlohmann::json::object();
  std::map<std::string, nlohmann::json> scheme_overrides;  // merged over pretrain
  EvalProtocol eval;
};

void to_json(nlohmann::json &j, const ExperimentConfig &c);
// Unknown keys raise ConfigError. Relative corpus paths stay relative;
// resolve them with resolve_paths.
void from_json(const nlohmann::json &j, ExperimentConfig &c);

// Applies "dotted.key=value" overrides to a config document. The value is
// parsed as JSON when possible, else taken as a string.
void apply_overrides(nlohmann::json &doc, const std::vector<std::string> &overrides);

// Makes corpus paths absolute against base_dir and the output directory
// absolute against $PSENH_OUTPUT_ROOT (or the working directory).
void resolve_paths(ExperimentConfig &c, const std::filesystem::path &base_dir);

// Reads, overrides, parses, resolves and validates a config file.
ExperimentConfig load_experiment_config(const std::filesystem::path &path,
                                        const std::vector<std::string> &overrides = {});

// Throws ConfigError describing the first invalid field.
void validate_experiment_config(const ExperimentConfig &c);

// Pretraining and finetuning settings as they will run.
TrainConfig resolve_pretrain_config(const ExperimentConfig &c, const std::string &architecture,
                                    const std::string &scheme_name, std::uint64_t seed);
TrainConfig resolve_finetune_config(const ExperimentConfig &c, const std::string &architecture,
                                    double budget_sec, std::uint64_t seed);

enum class Stage { kManifest, kPartition, kPremix, kPretrain, kFinetune, kEvaluate, kReport };
const char *stage_name(Stage s);
Stage parse_stage(const std::string &name);

struct RunSummary {
  std::filesystem::path output_dir;
  int units_run = 0;
  int units_reused = 0;
  std::optional<Grid> grid;  // set once the report stage ran
};

using ProgressLog = std::function<void(const std::string &)>;

// Runs the pipeline through `last`. Every unit of work (a corpus, a
// partition, a premixture set, a checkpoint, an evaluation) is keyed by a
// hash of everything it depends on; a unit whose stage record matches is
// reused, so interrupted runs resume and new budgets reuse pretraining.
// Errors keep their type and gain a "[stage]" prefix.
RunSummary run_experiment(const ExperimentConfig &config, Stage last = Stage::kReport,
                          const ProgressLog &log = {});

// Per-cell evaluation results stored by a completed run.
std::vector<CellReport> load_run_reports(const std::filesystem::path &run_dir);

// Pools the evaluation results of several runs into one grid.
Grid merge_runs(const std::vector<std::filesystem::path> &run_dirs);

}  // namespace psenh
