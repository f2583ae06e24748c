// Copyright 2026 The psenh Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "psenh/model.hpp"

namespace psenh {

// Where a set of weights came from.
struct Provenance {
  std::string scheme;                  // multispeaker, pseudose, cm, random-init, finetune
  std::uint64_t seed = 0;
  int step = 0;
  std::optional<double> premix_snr_db; // unset for schemes that never premix
  std::string init_scheme;             // for finetuned weights: scheme of the initializer
  double ft_budget_sec = 0.0;

  bool operator==(const Provenance &) const = default;
};

void to_json(nlohmann::json &j, const Provenance &p);
void from_json(const nlohmann::json &j, Provenance &p);

struct ModelCheckpoint {
  ModelConfig model;
  nlohmann::json experiment = nlohmann::json::object();  // resolved run config, free-form
  Provenance provenance;
  ParameterSet weights;

  // A model carrying these weights. Throws ShapeError naming the first tensor
  // that does not fit the architecture.
  std::unique_ptr<EnhancementModel> instantiate() const;
};

// Snapshot of a model's current weights.
ModelCheckpoint make_checkpoint(const EnhancementModel &model, Provenance provenance,
                                nlohmann::json experiment = nlohmann::json::object());

// Layout: 8-byte magic "PSECKPT1", u64 little-endian header length, a JSON
// header (model config, experiment, provenance, tensor directory), then each
// tensor as raw little-endian float32 in directory order.
void save_checkpoint(const ModelCheckpoint &c, const std::filesystem::path &path);

// Throws DataError for a missing or corrupt file and ShapeError when a
// tensor does not match the architecture in the header.
ModelCheckpoint load_checkpoint(const std::filesystem::path &path);

}  // namespace psenh
