// Copyright 2026 The psenh Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "psenh/audio.hpp"
#include "psenh/params.hpp"

namespace psenh {

// Recurrent time-frequency mask estimator: STFT magnitude -> stacked GRU ->
// dense + sigmoid -> ratio mask -> masked mixture -> inverse STFT.
struct MaskNetConfig {
  int hidden_size = 64;
  int num_layers = 2;
  int window_size = 1024;

  int num_bins() const { return window_size / 2 + 1; }
  bool operator==(const MaskNetConfig &) const = default;
};

// Small convolutional time-domain separator with one output source. Field
// names follow the usual encoder / TCN notation: N filters of length L,
// bottleneck B, hidden H, skip Sc, kernel P, X blocks repeated R times.
struct SeparatorConfig {
  int num_filters = 128;      // N
  int filter_length = 40;     // L, encoder stride L/2
  int bottleneck = 128;       // B
  int hidden = 256;           // H
  int skip = 128;             // Sc
  int kernel = 3;             // P
  int blocks = 7;             // X, dilations 1 .. 2^(X-1)
  int repeats = 2;            // R

  bool operator==(const SeparatorConfig &) const = default;
};

enum class ModelFamily { kMaskNet, kSeparator };

struct ModelConfig {
  ModelFamily family = ModelFamily::kMaskNet;
  MaskNetConfig masknet;
  SeparatorConfig separator;

  // "gru64", "gru128", "gru256", "convtasnet"; other hidden sizes print as
  // "gru<h>".
  std::string name() const;
  static ModelConfig from_name(const std::string &name);

  bool operator==(const ModelConfig &) const = default;
};

void to_json(nlohmann::json &j, const ModelConfig &c);
void from_json(const nlohmann::json &j, ModelConfig &c);

// Closed-form number of trainable scalars.
std::size_t param_count(const ModelConfig &config);

// A trainable waveform-to-waveform enhancer. Forward passes are const and
// reentrant; gradients go to a caller-owned ParameterSet.
class EnhancementModel {
 public:
  virtual ~EnhancementModel() = default;

  const ModelConfig &config() const { return config_; }
  ParameterSet &params() { return params_; }
  const ParameterSet &params() const { return params_; }

  // Seeded uniform fan-in initialization.
  virtual void initialize(std::uint64_t seed) = 0;

  // Outputs have the same length as their inputs.
  virtual std::vector<Signal> forward(const std::vector<const Signal *> &inputs) const = 0;

  // Re-runs the forward pass with caching and accumulates dL/dW into grads,
  // given dL/dy for every output.
  virtual void backward(const std::vector<const Signal *> &inputs,
                        const std::vector<Signal> &grad_outputs, ParameterSet &grads) const = 0;

  virtual std::unique_ptr<EnhancementModel> clone() const = 0;

  // Shortest input the model accepts.
  virtual std::size_t min_input_length() const = 0;

  AudioClip enhance(const AudioClip &mixture) const;

 protected:
  explicit EnhancementModel(ModelConfig c) : config_(std::move(c)) {}
  ModelConfig config_;
  ParameterSet params_;
};

std::unique_ptr<EnhancementModel> make_model(const ModelConfig &config, std::uint64_t seed);

}  // namespace psenh
