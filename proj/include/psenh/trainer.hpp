// Copyright 2026 The psenh Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "psenh/checkpoint.hpp"
#include "psenh/contrastive.hpp"
#include "psenh/pairing.hpp"
#include "psenh/premixture.hpp"
#include "psenh/sampler.hpp"

namespace psenh {

namespace scheme {
inline constexpr const char *kMultiSpeaker = "multispeaker";
inline constexpr const char *kPseudoSe = "pseudose";
inline constexpr const char *kContrastive = "cm";
inline constexpr const char *kRandomInit = "random-init";
inline constexpr const char *kFinetune = "finetune";
}  // namespace scheme

bool is_pretraining_scheme(const std::string &name);

struct TrainConfig {
  std::string scheme = scheme::kMultiSpeaker;
  int batch_size = 128;
  int pair_count = 0;               // CM pairs of each kind; 0 means batch_size / 2
  double learning_rate = 1e-3;
  int max_steps = 1000;
  int validation_every = 50;
  int validation_size = 32;         // frozen validation mixtures
  double validation_fraction = 0.1; // held-out share of the training material
  int patience = 10;                // validations without improvement; 0 disables
  double grad_clip = 5.0;           // global-norm bound; 0 disables
  std::uint64_t seed = 0;
  ContrastiveWeights contrastive;
  double ft_budget_sec = 0.0;
  SnrRange snr;
  double clip_sec = kClipSec;
  int prefetch = 2;                 // bounded batch queue depth; 0 builds batches inline
  Reduction reduction = Reduction::kSum;
  std::optional<double> premix_snr_db;  // recorded in provenance

  int effective_pair_count() const { return pair_count > 0 ? pair_count : std::max(1, batch_size / 2); }
  bool operator==(const TrainConfig &) const = default;
};

void to_json(nlohmann::json &j, const TrainConfig &c);
// Missing keys keep their defaults; unknown keys raise ConfigError.
void from_json(const nlohmann::json &j, TrainConfig &c);
// Throws ConfigError on out-of-range values.
void validate_train_config(const TrainConfig &c);

// Defaults per architecture: batch 128 / lr 1e-3 for mask nets, 8 / 1e-4
// for the separator.
TrainConfig default_train_config(const ModelConfig &model);

struct StepRecord {
  int step = 0;
  double loss = 0.0;
  double se_terms = 0.0;
  double contrastive = 0.0;
  int degenerate_pairs = 0;
  double grad_norm = 0.0;
  std::uint64_t batch_seed = 0;  // replays the step's batch
};

struct ValidationRecord {
  int step = 0;
  double si_sdri_db = 0.0;
  double loss = 0.0;
  bool best = false;
};

struct TrainTrace {
  std::string scheme;
  std::vector<StepRecord> steps;
  std::vector<ValidationRecord> validations;
  std::set<std::string> accessed_ids;  // every audio id a batch or validation read
  std::vector<std::string> warnings;
  int best_step = 0;
  bool stopped_early = false;

  // One JSON object per line: a header, then step, validation, warning and
  // access records.
  void write_jsonl(std::ostream &out) const;
  void save(const std::filesystem::path &path) const;
  static TrainTrace load(const std::filesystem::path &path);
};

struct TrainResult {
  ModelCheckpoint checkpoint;  // best-validation weights
  TrainTrace trace;
};

// One optimization step's data: supervised examples, or a pair batch for
// the contrastive objective.
struct StepBatch {
  std::vector<TrainingExample> examples;
  std::optional<PairBatch> pairs;
  std::vector<std::string> accessed_ids;
};

// Builds the batch for a step from its seed. Must be safe to call from a
// producer thread.
using BatchProducer = std::function<StepBatch(int step, std::uint64_t seed)>;

// Frozen validation mixtures; inputs and targets only.
struct ValidationSet {
  std::vector<TrainingExample> mixtures;
};

ValidationSet make_validation_set(const ClipPool &speech, const ClipPool &noise, int count,
                                  const SnrRange &snr, double clip_sec, std::uint64_t seed);

struct ValidationScore {
  double si_sdri_db = 0.0;
  double loss = 0.0;  // mean se_loss
};
ValidationScore score_validation(const EnhancementModel &model, const ValidationSet &val);

// Adam on the batch objective (mean over mixtures) with gradient clipping,
// validation every validation_every steps (and at step 0), best-SI-SDRi
// model selection and patience-based early stopping. Throws DivergenceError
// on a non-finite loss after flushing the partial trace to trace_path.
TrainResult train(const EnhancementModel &init, const BatchProducer &producer,
                  const ValidationSet &validation, const TrainConfig &cfg, Provenance provenance,
                  const std::optional<std::filesystem::path> &trace_path = std::nullopt);

// Seed of the batch for a given step.
std::uint64_t step_seed(const TrainConfig &cfg, int step);

// Batches of supervised mixtures drawn from speech x noise.
BatchProducer supervised_producer(const ClipPool &speech, const ClipPool &noise,
                                  const TrainConfig &cfg);
// Pair batches of effective_pair_count() positive and negative pairs.
BatchProducer pair_producer(const PremixtureSet &premixtures, const ClipPool &noise,
                            const TrainConfig &cfg);
// The same mixtures as plain (input, target) examples, in PairBatch::inputs() order.
std::vector<TrainingExample> pair_batch_examples(const PairBatch &pairs);

// Every k-th item (k from the fraction) goes to validation, keeping at least
// min_train items for training. Returns empty validation indices when that
// is impossible.
struct Holdout {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
};
Holdout split_holdout(std::size_t n, double fraction, std::size_t min_train);

// Supervised pretraining on general speakers' clean speech mixed with N_tr.
TrainResult pretrain_multispeaker(const EnhancementModel &init, const ClipPool &general,
                                  const ClipPool &noise_train, const TrainConfig &cfg,
                                  const std::optional<std::filesystem::path> &trace_path = {});

// Noise injection on premixtures; targets are the premixed clips.
TrainResult pretrain_pseudose(const EnhancementModel &init, const PremixtureSet &premixtures,
                              const ClipPool &noise_train, const TrainConfig &cfg,
                              const std::optional<std::filesystem::path> &trace_path = {});

// Contrastive-mixtures pretraining over positive and negative pair batches.
TrainResult pretrain_cm(const EnhancementModel &init, const PremixtureSet &premixtures,
                        const ClipPool &noise_train, const TrainConfig &cfg,
                        const std::optional<std::filesystem::path> &trace_path = {});

// Freshly initialized weights recorded as a checkpoint.
ModelCheckpoint random_init_checkpoint(const ModelConfig &model, std::uint64_t seed);

// Supervised finetuning on the speaker's few-shot clean set. A zero budget
// returns the initializer unchanged. Validation mixtures come from the same
// clips under an independent seed, since the set is too small to split.
TrainResult finetune(const ModelCheckpoint &init, const ClipPool &finetune_set,
                     const ClipPool &noise_train, const TrainConfig &cfg,
                     const std::optional<std::filesystem::path> &trace_path = {});

}  // namespace psenh
