// Copyright 2026 The psenh Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <span>

#include "psenh/audio.hpp"

namespace psenh {

// Added to both numerator and denominator of every SDR ratio.
inline constexpr double kSdrEpsilon = 1e-8;
// SDR values are clamped to [-kSdrCap, +kSdrCap] dB.
inline constexpr double kSdrCap = 50.0;

struct SdrResult {
  double value_db = 0.0;
  bool capped = false;
};

// Scale-invariant SDR of estimate v_hat against reference v. The reference
// is projected as alpha * v with alpha = <v_hat, v> / <v, v>, and the residual
// is alpha * v - v_hat. Throws ZeroEnergyError for a silent reference; a
// silent estimate returns the floor.
SdrResult si_sdr(std::span<const double> v, std::span<const double> v_hat);

// Scale-dependent SDR: same numerator as si_sdr, residual v - v_hat.
SdrResult sd_sdr(std::span<const double> v, std::span<const double> v_hat);

inline SdrResult si_sdr(const AudioClip &v, const AudioClip &v_hat) {
  return si_sdr(v.view(), v_hat.view());
}
inline SdrResult sd_sdr(const AudioClip &v, const AudioClip &v_hat) {
  return sd_sdr(v.view(), v_hat.view());
}

// The training loss: -sd_sdr(v, v_hat).
double se_loss(std::span<const double> v, std::span<const double> v_hat);

struct SeLossGrad {
  double value = 0.0;
  bool capped = false;
  Signal d_reference;  // dL/dv
  Signal d_estimate;   // dL/dv_hat
};

// se_loss with its analytic gradient in both arguments. Gradients are zero
// inside the clamped region.
SeLossGrad se_loss_grad(std::span<const double> v, std::span<const double> v_hat);

// si_sdr(s, y) - si_sdr(s, x).
double si_sdr_improvement(std::span<const double> s, std::span<const double> x,
                          std::span<const double> y);

}  // namespace psenh
