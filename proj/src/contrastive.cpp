// Copyright 2026 The psenh Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "psenh/contrastive.hpp"

#include <algorithm>

#include "psenh/errors.hpp"

namespace psenh {

namespace {

bool same_signal(std::span<const double> a, std::span<const double> b) {
  return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin());
}

void axpy(double a, const Signal &x, Signal &y) {
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += a * x[i];
}

}  // namespace

PairLoss loss_positive(std::span<const double> s_tilde, std::span<const double> y1,
                       std::span<const double> y2, const ContrastiveWeights &w) {
  PairLoss l;
  l.se_terms = se_loss(s_tilde, y1) + se_loss(s_tilde, y2);
  l.contrastive = w.lambda_p * se_loss(y1, y2);
  l.total = l.se_terms + l.contrastive;
  return l;
}

PairLossGrad loss_positive_grad(std::span<const double> s_tilde, std::span<const double> y1,
                                std::span<const double> y2, const ContrastiveWeights &w) {
  const auto e1 = se_loss_grad(s_tilde, y1);
  const auto e2 = se_loss_grad(s_tilde, y2);
  const auto e12 = se_loss_grad(y1, y2);
  PairLossGrad g;
  g.loss.se_terms = e1.value + e2.value;
  g.loss.contrastive = w.lambda_p * e12.value;
  g.loss.total = g.loss.se_terms + g.loss.contrastive;
  g.d_y1 = e1.d_estimate;
  g.d_y2 = e2.d_estimate;
  if (w.lambda_p != 0.0) {
    axpy(w.lambda_p, e12.d_reference, g.d_y1);
    axpy(w.lambda_p, e12.d_estimate, g.d_y2);
  }
  return g;
}

PairLoss loss_negative(std::span<const double> s1, std::span<const double> s2,
                       std::span<const double> y1, std::span<const double> y2,
                       const ContrastiveWeights &w) {
  PairLoss l;
  l.se_terms = se_loss(s1, y1) + se_loss(s2, y2);
  const double gap = se_loss(s1, s2) - se_loss(y1, y2);
  l.contrastive = w.lambda_n * gap * gap;
  l.total = l.se_terms + l.contrastive;
  l.degenerate = same_signal(s1, s2);
  return l;
}

PairLossGrad loss_negative_grad(std::span<const double> s1, std::span<const double> s2,
                                std::span<const double> y1, std::span<const double> y2,
                                const ContrastiveWeights &w) {
  const auto e1 = se_loss_grad(s1, y1);
  const auto e2 = se_loss_grad(s2, y2);
  const double sources = se_loss(s1, s2);
  const auto e12 = se_loss_grad(y1, y2);
  const double gap = sources - e12.value;
  PairLossGrad g;
  g.loss.se_terms = e1.value + e2.value;
  g.loss.contrastive = w.lambda_n * gap * gap;
  g.loss.total = g.loss.se_terms + g.loss.contrastive;
  g.loss.degenerate = same_signal(s1, s2);
  g.d_y1 = e1.d_estimate;
  g.d_y2 = e2.d_estimate;
  if (w.lambda_n != 0.0) {
    // d/dy of lambda_n * gap^2 where gap depends on y through -E(y1 || y2).
    const double k = -2.0 * w.lambda_n * gap;
    axpy(k, e12.d_reference, g.d_y1);
    axpy(k, e12.d_estimate, g.d_y2);
  }
  return g;
}

namespace {

void check_layout(const PairBatch &batch, const BatchEstimates &est) {
  if (batch.positives.empty() || batch.negatives.empty()) {
    throw ShapeError("contrastive batch needs at least one positive and one negative pair");
  }
  if (batch.positives.size() != batch.negatives.size()) {
    throw ShapeError("contrastive batch needs as many negative as positive pairs");
  }
  if (est.size() != 2 * (batch.positives.size() + batch.negatives.size())) {
    throw ShapeError("estimate count does not match the pair batch");
  }
}

double reduction_scale(Reduction r, std::size_t mixtures) {
  return r == Reduction::kMean ? 1.0 / static_cast<double>(mixtures) : 1.0;
}

void scale(BatchLoss &l, double s) {
  l.total *= s;
  l.se_terms *= s;
  l.contrastive *= s;
}

}  // namespace

BatchLoss loss_cm_batch(const PairBatch &batch, const BatchEstimates &est,
                        const ContrastiveWeights &w, Reduction reduction) {
  check_layout(batch, est);
  BatchLoss out;
  std::size_t i = 0;
  auto add = [&out](const PairLoss &l) {
    out.total += l.total;
    out.se_terms += l.se_terms;
    out.contrastive += l.contrastive;
    out.degenerate_pairs += l.degenerate ? 1 : 0;
  };
  for (const auto &p : batch.positives) {
    add(loss_positive(p.s_tilde.clip.view(), est[i], est[i + 1], w));
    i += 2;
  }
  for (const auto &n : batch.negatives) {
    add(loss_negative(n.s1_tilde.clip.view(), n.s2_tilde.clip.view(), est[i], est[i + 1], w));
    i += 2;
  }
  scale(out, reduction_scale(reduction, est.size()));
  return out;
}

BatchLossGrad loss_cm_batch_grad(const PairBatch &batch, const BatchEstimates &est,
                                 const ContrastiveWeights &w, Reduction reduction) {
  check_layout(batch, est);
  BatchLossGrad out;
  out.d_estimates.resize(est.size());
  std::size_t i = 0;
  auto add = [&](PairLossGrad &&g) {
    out.loss.total += g.loss.total;
    out.loss.se_terms += g.loss.se_terms;
    out.loss.contrastive += g.loss.contrastive;
    out.loss.degenerate_pairs += g.loss.degenerate ? 1 : 0;
    out.d_estimates[i] = std::move(g.d_y1);
    out.d_estimates[i + 1] = std::move(g.d_y2);
    i += 2;
  };
  for (const auto &p : batch.positives) {
    add(loss_positive_grad(p.s_tilde.clip.view(), est[i], est[i + 1], w));
  }
  for (const auto &n : batch.negatives) {
    add(loss_negative_grad(n.s1_tilde.clip.view(), n.s2_tilde.clip.view(), est[i], est[i + 1], w));
  }
  const double s = reduction_scale(reduction, est.size());
  scale(out.loss, s);
  if (s != 1.0) {
    for (auto &g : out.d_estimates) {
      for (double &v : g) v *= s;
    }
  }
  return out;
}

BatchLoss loss_se_batch(const std::vector<const AudioClip *> &targets,
                        const BatchEstimates &est, Reduction reduction) {
  if (targets.empty()) throw ShapeError("empty batch");
  if (targets.size() != est.size()) throw ShapeError("estimate count does not match targets");
  BatchLoss out;
  // Accumulated in pairs so the sum order matches loss_cm_batch.
  for (std::size_t i = 0; i < est.size(); i += 2) {
    double pair = se_loss(targets[i]->view(), est[i]);
    if (i + 1 < est.size()) pair += se_loss(targets[i + 1]->view(), est[i + 1]);
    out.total += pair;
  }
  out.se_terms = out.total;
  scale(out, reduction_scale(reduction, est.size()));
  return out;
}

BatchLossGrad loss_se_batch_grad(const std::vector<const AudioClip *> &targets,
                                 const BatchEstimates &est, Reduction reduction) {
  if (targets.empty()) throw ShapeError("empty batch");
  if (targets.size() != est.size()) throw ShapeError("estimate count does not match targets");
  BatchLossGrad out;
  out.d_estimates.resize(est.size());
  for (std::size_t i = 0; i < est.size(); i += 2) {
    auto g = se_loss_grad(targets[i]->view(), est[i]);
    double pair = g.value;
    out.d_estimates[i] = std::move(g.d_estimate);
    if (i + 1 < est.size()) {
      auto g2 = se_loss_grad(targets[i + 1]->view(), est[i + 1]);
      pair += g2.value;
      out.d_estimates[i + 1] = std::move(g2.d_estimate);
    }
    out.loss.total += pair;
  }
  out.loss.se_terms = out.loss.total;
  const double s = reduction_scale(reduction, est.size());
  scale(out.loss, s);
  if (s != 1.0) {
    for (auto &g : out.d_estimates) {
      for (double &v : g) v *= s;
    }
  }
  return out;
}

}  // namespace psenh
