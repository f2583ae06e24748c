// Copyright 2026 The psenh Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <span>
#include <vector>

#include "psenh/metrics.hpp"
#include "psenh/pairing.hpp"

namespace psenh {

struct ContrastiveWeights {
  double lambda_p = 0.05;
  double lambda_n = 0.0001;
  bool operator==(const ContrastiveWeights &) const = default;
};

// Loss of one pair, split into the source-to-estimate part and the
// estimate-to-estimate (contrastive) part.
struct PairLoss {
  double total = 0.0;
  double se_terms = 0.0;
  double contrastive = 0.0;
  bool degenerate = false;  // negative pair whose two sources coincide
};

struct PairLossGrad {
  PairLoss loss;
  Signal d_y1;
  Signal d_y2;
};

// E(s~ || y1) + E(s~ || y2) + lambda_p * E(y1 || y2)
PairLoss loss_positive(std::span<const double> s_tilde, std::span<const double> y1,
                       std::span<const double> y2, const ContrastiveWeights &w);
PairLossGrad loss_positive_grad(std::span<const double> s_tilde, std::span<const double> y1,
                                std::span<const double> y2, const ContrastiveWeights &w);

// E(s1 || y1) + E(s2 || y2) + lambda_n * [E(s1 || s2) - E(y1 || y2)]^2
PairLoss loss_negative(std::span<const double> s1, std::span<const double> s2,
                       std::span<const double> y1, std::span<const double> y2,
                       const ContrastiveWeights &w);
PairLossGrad loss_negative_grad(std::span<const double> s1, std::span<const double> s2,
                                std::span<const double> y1, std::span<const double> y2,
                                const ContrastiveWeights &w);

enum class Reduction {
  kSum,   // plain sum over pairs (or mixtures)
  kMean,  // sum divided by the number of mixtures in the batch
};

struct BatchLoss {
  double total = 0.0;
  double se_terms = 0.0;
  double contrastive = 0.0;
  int degenerate_pairs = 0;
};

// Model outputs for a PairBatch, laid out like PairBatch::inputs().
using BatchEstimates = std::vector<Signal>;

struct BatchLossGrad {
  BatchLoss loss;
  std::vector<Signal> d_estimates;  // same layout as the estimates
};

// Sum of L_p over positive pairs plus L_n over negative pairs.
BatchLoss loss_cm_batch(const PairBatch &batch, const BatchEstimates &estimates,
                        const ContrastiveWeights &w, Reduction reduction = Reduction::kSum);
BatchLossGrad loss_cm_batch_grad(const PairBatch &batch, const BatchEstimates &estimates,
                                 const ContrastiveWeights &w,
                                 Reduction reduction = Reduction::kSum);

// Sum of se_loss(target_i, estimate_i): the supervised / pseudo-SE objective.
BatchLoss loss_se_batch(const std::vector<const AudioClip *> &targets,
                        const BatchEstimates &estimates, Reduction reduction = Reduction::kSum);
BatchLossGrad loss_se_batch_grad(const std::vector<const AudioClip *> &targets,
                                 const BatchEstimates &estimates,
                                 Reduction reduction = Reduction::kSum);

}  // namespace psenh
