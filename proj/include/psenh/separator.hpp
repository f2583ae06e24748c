// Copyright 2026 The psenh Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include "psenh/model.hpp"

namespace psenh {

// Time-domain separator: learned encoder (ReLU), a temporal convolutional
// network of dilated depthwise-separable blocks with global layer norm and
// PReLU, a sigmoid mask over the encoder output, and a transposed-conv
// decoder. Non-causal; one output source.
class Separator : public EnhancementModel {
 public:
  explicit Separator(const SeparatorConfig &config);

  void initialize(std::uint64_t seed) override;
  std::vector<Signal> forward(const std::vector<const Signal *> &inputs) const override;
  void backward(const std::vector<const Signal *> &inputs, const std::vector<Signal> &grad_outputs,
                ParameterSet &grads) const override;
  std::unique_ptr<EnhancementModel> clone() const override;
  std::size_t min_input_length() const override;

 private:
  struct NormCache {
    MatrixF xhat;
    float inv_std = 0.0f;
  };
  struct BlockCache {
    MatrixF input, a1, g1, c, g2;
    NormCache n1, n2;
  };
  struct Cache {
    std::size_t length = 0;
    int frames = 0;
    MatrixF segments;   // [L x K]
    MatrixF enc_pre;    // encoder pre-activation
    MatrixF enc;        // ReLU output
    NormCache in_norm;
    MatrixF bottleneck_in;
    std::vector<BlockCache> blocks;
    MatrixF skip;
    MatrixF mask;
  };

  // Tensor indices of one TCN block.
  struct BlockIndex {
    std::size_t conv_in_w, conv_in_b, prelu1, norm1_g, norm1_b, dconv_w, dconv_b, prelu2, norm2_g,
        norm2_b, res_w, res_b, skip_w, skip_b;
    int dilation;
  };

  Signal run(const Signal &x, Cache *cache) const;
  void backward_one(const Signal &x, const Signal &grad, ParameterSet &grads) const;

  int stride() const { return config_.separator.filter_length / 2; }

  std::size_t encoder_, in_norm_g_, in_norm_b_, bottleneck_w_, bottleneck_b_, out_prelu_, mask_w_,
      mask_b_, decoder_;
  std::vector<BlockIndex> blocks_;
};

}  // namespace psenh
