// Copyright 2026 The psenh Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include "psenh/model.hpp"
#include "psenh/stft.hpp"

namespace psenh {

struct MaskNetOutput {
  AudioClip estimate;
  RatioMask mask;
};

// GRU ratio-mask estimator. The input feature is the mixture magnitude
// spectrogram times 2 / sum(window), so a full-scale sinusoid reads ~1; no
// per-utterance normalization is applied. Gate layout and the two bias
// vectors per gate follow the common (r, z, n) GRU convention.
class MaskNet : public EnhancementModel {
 public:
  explicit MaskNet(const MaskNetConfig &config);

  void initialize(std::uint64_t seed) override;
  std::vector<Signal> forward(const std::vector<const Signal *> &inputs) const override;
  void backward(const std::vector<const Signal *> &inputs, const std::vector<Signal> &grad_outputs,
                ParameterSet &grads) const override;
  std::unique_ptr<EnhancementModel> clone() const override;
  std::size_t min_input_length() const override;

  MaskNetOutput enhance_with_mask(const AudioClip &mixture) const;

  const Stft &stft() const { return stft_; }

 private:
  struct LayerCache {
    MatrixF r, z, n, hn;  // gates and W_hn h + b_hn, [H x T*B]
    MatrixF h;            // hidden states incl. h_0, [H x (T+1)*B]
  };
  struct Cache {
    std::vector<Spectrogram> specs;
    MatrixF features;     // [bins x T*B], column t*B + b
    std::vector<LayerCache> layers;
    MatrixF mask;         // [bins x T*B]
  };

  // Runs the network on equally long inputs.
  void run(const std::vector<const Signal *> &inputs, Cache &cache) const;
  std::vector<Signal> synthesize(const Cache &cache, const std::vector<const Signal *> &inputs) const;

  int num_bins() const { return config_.masknet.num_bins(); }
  int hidden() const { return config_.masknet.hidden_size; }

  Stft stft_;
  float feature_scale_;
};

}  // namespace psenh
