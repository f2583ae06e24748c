// Copyright 2026 The psenh Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "psenh/contrastive.hpp"
#include "psenh/errors.hpp"
#include "psenh/metrics.hpp"
#include "test_helpers.hpp"

namespace psenh {
namespace {

using testing::gaussian_signal;

// Long-double evaluation straight from the definitions: project the
// reference, form the residual vector, take the energy ratio.
double direct_sdr(const Signal &v, const Signal &v_hat, bool scale_invariant) {
  long double vv = 0, hv = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    vv += static_cast<long double>(v[i]) * v[i];
    hv += static_cast<long double>(v_hat[i]) * v[i];
  }
  const long double alpha = hv / vv;
  long double target = 0, residual = 0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const long double t = alpha * v[i];
    const long double r = (scale_invariant ? t : static_cast<long double>(v[i])) - v_hat[i];
    target += t * t;
    residual += r * r;
  }
  const long double db = 10.0L * std::log10((target + 1e-8L) / (residual + 1e-8L));
  return static_cast<double>(std::clamp<long double>(db, -50.0L, 50.0L));
}

TEST(SiSdr, HandDerivedExamples) {
  EXPECT_EQ(si_sdr(Signal{1, 0}, Signal{1, 1}).value_db, 0.0);
  EXPECT_FALSE(si_sdr(Signal{1, 0}, Signal{1, 1}).capped);

  const auto perfect = si_sdr(Signal{0.3, -0.2, 0.9}, Signal{0.3, -0.2, 0.9});
  EXPECT_EQ(perfect.value_db, kSdrCap);
  EXPECT_TRUE(perfect.capped);

  const auto orthogonal = si_sdr(Signal{1, 0, 0}, Signal{0, 1, 0});
  EXPECT_EQ(orthogonal.value_db, -kSdrCap);
  EXPECT_TRUE(orthogonal.capped);

  const auto doubled = si_sdr(Signal{0.3, -0.2, 0.9}, Signal{0.6, -0.4, 1.8});
  EXPECT_EQ(doubled.value_db, kSdrCap);
  EXPECT_TRUE(doubled.capped);
}

TEST(SdSdr, HandDerivedExamples) {
  EXPECT_EQ(sd_sdr(Signal{1, 0}, Signal{1, 1}).value_db, 0.0);
  const auto perfect = sd_sdr(Signal{0.3, -0.2, 0.9}, Signal{0.3, -0.2, 0.9});
  EXPECT_EQ(perfect.value_db, kSdrCap);
  EXPECT_TRUE(perfect.capped);
  // Scale dependence: 10 log10(4) where si_sdr saturates.
  for (int t = 0; t < 10; ++t) {
    const Signal v = gaussian_signal(64, t);
    Signal v2 = v;
    for (double &x : v2) x *= 2.0;
    EXPECT_NEAR(sd_sdr(v, v2).value_db, 6.0206, 5e-5);
    EXPECT_FALSE(sd_sdr(v, v2).capped);
    EXPECT_EQ(si_sdr(v, v2).value_db, kSdrCap);
  }
}

TEST(Sdr, ZeroEnergyHandling) {
  EXPECT_THROW(si_sdr(Signal{0, 0}, Signal{1, 0}), ZeroEnergyError);
  EXPECT_THROW(sd_sdr(Signal{0, 0}, Signal{1, 0}), ZeroEnergyError);
  const auto silent = si_sdr(Signal{1, 0}, Signal{0, 0});
  EXPECT_EQ(silent.value_db, -kSdrCap);
  EXPECT_TRUE(silent.capped);
  EXPECT_EQ(sd_sdr(Signal{1, 0}, Signal{0, 0}).value_db, -kSdrCap);
  EXPECT_THROW(si_sdr(Signal{1, 0}, Signal{1, 0, 0}), ShapeError);
}

TEST(Sdr, MatchesDirectFormula) {
  std::mt19937_64 rng(42);
  std::uniform_int_distribution<int> len(2, 400);
  std::uniform_real_distribution<double> noise_level(0.0, 2.0);
  for (int t = 0; t < 2000; ++t) {
    const std::size_t n = len(rng);
    const Signal v = gaussian_signal(n, 10 * t);
    Signal v_hat = gaussian_signal(n, 10 * t + 1, noise_level(rng));
    for (std::size_t i = 0; i < n; ++i) v_hat[i] += v[i];
    const double si = si_sdr(v, v_hat).value_db;
    const double sd = sd_sdr(v, v_hat).value_db;
    const double si_ref = direct_sdr(v, v_hat, true);
    const double sd_ref = direct_sdr(v, v_hat, false);
    ASSERT_LE(std::abs(si - si_ref), 1e-9 * std::max(1.0, std::abs(si_ref))) << t;
    ASSERT_LE(std::abs(sd - sd_ref), 1e-9 * std::max(1.0, std::abs(sd_ref))) << t;
  }
}

TEST(Sdr, ScaleInvarianceOfSiSdr) {
  for (int t = 0; t < 50; ++t) {
    const Signal v = gaussian_signal(100, t);
    Signal v_hat = gaussian_signal(100, 500 + t);
    for (std::size_t i = 0; i < v.size(); ++i) v_hat[i] += 0.7 * v[i];
    Signal scaled = v_hat;
    // Scales large enough that the regularizer is negligible.
    const double c = 0.5 + 0.5 * t;
    for (double &x : scaled) x *= c;
    EXPECT_NEAR(si_sdr(v, scaled).value_db, si_sdr(v, v_hat).value_db, 1e-6);
  }
}

TEST(SeLoss, IsNegatedSdSdr) {
  EXPECT_EQ(se_loss(Signal{1, 0}, Signal{1, 1}), 0.0);
  EXPECT_EQ(se_loss(Signal{1, 2}, Signal{1, 2}), -kSdrCap);
  const Signal v = gaussian_signal(50, 1), y = gaussian_signal(50, 2);
  EXPECT_EQ(se_loss(v, y), -sd_sdr(v, y).value_db);
}

TEST(SiSdrImprovement, Examples) {
  const Signal s = gaussian_signal(200, 1);
  Signal x = gaussian_signal(200, 2);
  for (std::size_t i = 0; i < s.size(); ++i) x[i] += s[i];
  EXPECT_EQ(si_sdr_improvement(s, x, x), 0.0);
  EXPECT_EQ(si_sdr_improvement(s, x, s), kSdrCap - si_sdr(s, x).value_db);
}

// Central differences of f around each coordinate of y.
template <typename F>
double max_relative_error(F f, Signal y, const Signal &analytic) {
  constexpr double h = 1e-4;
  double worst = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double orig = y[i];
    y[i] = orig + h;
    const double up = f(y);
    y[i] = orig - h;
    const double down = f(y);
    y[i] = orig;
    const double numeric = (up - down) / (2 * h);
    const double scale = std::max({std::abs(numeric), std::abs(analytic[i]), 1e-2});
    worst = std::max(worst, std::abs(numeric - analytic[i]) / scale);
  }
  return worst;
}

TEST(Gradients, SeLossMatchesFiniteDifferences) {
  for (int t = 0; t < 100; ++t) {
    const Signal v = gaussian_signal(32, t);
    Signal y = gaussian_signal(32, 1000 + t, 0.7);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += v[i];
    const auto g = se_loss_grad(v, y);
    ASSERT_FALSE(g.capped);
    EXPECT_EQ(g.value, se_loss(v, y));
    EXPECT_LT(max_relative_error([&](const Signal &e) { return se_loss(v, e); }, y, g.d_estimate),
              1e-4);
    EXPECT_LT(max_relative_error([&](const Signal &r) { return se_loss(r, y); }, v, g.d_reference),
              1e-4);
  }
}

TEST(Gradients, CappedLossHasZeroGradient) {
  const Signal v = gaussian_signal(16, 1);
  const auto g = se_loss_grad(v, v);
  EXPECT_TRUE(g.capped);
  for (double d : g.d_estimate) EXPECT_EQ(d, 0.0);
}

TEST(Gradients, PositivePairMatchesFiniteDifferences) {
  const ContrastiveWeights w{0.5, 0.0};
  for (int t = 0; t < 100; ++t) {
    const Signal s = gaussian_signal(32, t);
    Signal y1 = gaussian_signal(32, 2000 + t, 0.5), y2 = gaussian_signal(32, 3000 + t, 0.5);
    for (std::size_t i = 0; i < s.size(); ++i) {
      y1[i] += s[i];
      y2[i] += s[i];
    }
    const auto g = loss_positive_grad(s, y1, y2, w);
    EXPECT_NEAR(g.loss.total, loss_positive(s, y1, y2, w).total, 1e-12);
    EXPECT_LT(max_relative_error([&](const Signal &a) { return loss_positive(s, a, y2, w).total; },
                                 y1, g.d_y1),
              1e-4);
    EXPECT_LT(max_relative_error([&](const Signal &b) { return loss_positive(s, y1, b, w).total; },
                                 y2, g.d_y2),
              1e-4);
  }
}

TEST(Gradients, NegativePairMatchesFiniteDifferences) {
  const ContrastiveWeights w{0.0, 0.01};
  for (int t = 0; t < 100; ++t) {
    const Signal s1 = gaussian_signal(32, t), s2 = gaussian_signal(32, 7000 + t);
    Signal y1 = gaussian_signal(32, 4000 + t, 0.5), y2 = gaussian_signal(32, 5000 + t, 0.5);
    for (std::size_t i = 0; i < s1.size(); ++i) {
      y1[i] += s1[i];
      y2[i] += s2[i];
    }
    const auto g = loss_negative_grad(s1, s2, y1, y2, w);
    EXPECT_NEAR(g.loss.total, loss_negative(s1, s2, y1, y2, w).total, 1e-12);
    EXPECT_LT(max_relative_error(
                  [&](const Signal &a) { return loss_negative(s1, s2, a, y2, w).total; }, y1,
                  g.d_y1),
              1e-4);
    EXPECT_LT(max_relative_error(
                  [&](const Signal &b) { return loss_negative(s1, s2, y1, b, w).total; }, y2,
                  g.d_y2),
              1e-4);
  }
}

TEST(PairLosses, CompositionFromSeLoss) {
  const ContrastiveWeights w;
  for (int t = 0; t < 20; ++t) {
    const Signal s = gaussian_signal(8, t), s2 = gaussian_signal(8, 50 + t);
    const Signal y1 = gaussian_signal(8, 100 + t), y2 = gaussian_signal(8, 200 + t);
    const auto p = loss_positive(s, y1, y2, w);
    EXPECT_DOUBLE_EQ(p.total, se_loss(s, y1) + se_loss(s, y2) + w.lambda_p * se_loss(y1, y2));
    const auto n = loss_negative(s, s2, y1, y2, w);
    const double gap = se_loss(s, s2) - se_loss(y1, y2);
    EXPECT_DOUBLE_EQ(n.total, se_loss(s, y1) + se_loss(s2, y2) + w.lambda_n * gap * gap);
    EXPECT_FALSE(n.degenerate);
  }
}

TEST(PairLosses, ZeroWeightsReduceToPseudoSeTerms) {
  const ContrastiveWeights off{0.0, 0.0};
  const Signal s = gaussian_signal(8, 1), s2 = gaussian_signal(8, 2);
  const Signal y1 = gaussian_signal(8, 3), y2 = gaussian_signal(8, 4);
  EXPECT_EQ(loss_positive(s, y1, y2, off).total, se_loss(s, y1) + se_loss(s, y2));
  EXPECT_EQ(loss_negative(s, s2, y1, y2, off).total, se_loss(s, y1) + se_loss(s2, y2));
}

TEST(PairLosses, PerfectAgreementSitsAtTheCap) {
  const ContrastiveWeights w;
  const Signal s = gaussian_signal(8, 1);
  EXPECT_DOUBLE_EQ(loss_positive(s, s, s, w).total, -2 * kSdrCap - w.lambda_p * kSdrCap);
}

TEST(PairLosses, MatchedDissimilarityHasNoContrastiveTerm) {
  const ContrastiveWeights w;
  const Signal s1 = gaussian_signal(8, 1), s2 = gaussian_signal(8, 2);
  const auto l = loss_negative(s1, s2, s1, s2, w);
  EXPECT_EQ(l.contrastive, 0.0);
  EXPECT_EQ(l.total, se_loss(s1, s1) + se_loss(s2, s2));
}

TEST(PairLosses, IdenticalSourcesFlagDegenerateNegative) {
  const Signal s = gaussian_signal(8, 1);
  const auto l = loss_negative(s, s, gaussian_signal(8, 2), gaussian_signal(8, 3), {});
  EXPECT_TRUE(l.degenerate);
  EXPECT_TRUE(std::isfinite(l.total));
}

}  // namespace
}  // namespace psenh
