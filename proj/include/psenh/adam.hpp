// Copyright 2026 The psenh Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include "psenh/params.hpp"

namespace psenh {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Adam with bias-corrected moments; state starts at zero.
class Adam {
 public:
  Adam(const ParameterSet &like, AdamConfig config);

  void step(ParameterSet &params, const ParameterSet &grads);
  int steps_taken() const { return t_; }

 private:
  AdamConfig config_;
  ParameterSet m_, v_;
  int t_ = 0;
};

// Scales grads in place so their global L2 norm is at most max_norm; returns
// the norm before clipping. max_norm <= 0 disables clipping.
double clip_global_norm(ParameterSet &grads, double max_norm);

}  // namespace psenh
