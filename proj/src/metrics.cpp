// Copyright 2026 The psenh Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "psenh/metrics.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "psenh/errors.hpp"

namespace psenh {

namespace {

struct Moments {
  double ref_energy = 0.0;   // <v, v>
  double est_energy = 0.0;   // <v_hat, v_hat>
  double cross = 0.0;        // <v_hat, v>
};

Moments moments(std::span<const double> v, std::span<const double> v_hat) {
  if (v.size() != v_hat.size()) {
    throw ShapeError("sdr: reference has " + std::to_string(v.size()) +
                     " samples, estimate has " + std::to_string(v_hat.size()));
  }
  Moments m;
  for (std::size_t i = 0; i < v.size(); ++i) {
    m.ref_energy += v[i] * v[i];
    m.est_energy += v_hat[i] * v_hat[i];
    m.cross += v_hat[i] * v[i];
  }
  if (m.ref_energy == 0.0) throw ZeroEnergyError("sdr: reference has zero energy");
  return m;
}

SdrResult clamp_db(double num, double den) {
  const double db = 10.0 * std::log10((num + kSdrEpsilon) / (den + kSdrEpsilon));
  if (db > kSdrCap) return {kSdrCap, true};
  if (db < -kSdrCap) return {-kSdrCap, true};
  return {db, false};
}

}  // namespace

SdrResult si_sdr(std::span<const double> v, std::span<const double> v_hat) {
  const Moments m = moments(v, v_hat);
  if (m.est_energy == 0.0) return {-kSdrCap, true};
  const double alpha = m.cross / m.ref_energy;
  double den = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double r = alpha * v[i] - v_hat[i];
    den += r * r;
  }
  return clamp_db(alpha * alpha * m.ref_energy, den);
}

SdrResult sd_sdr(std::span<const double> v, std::span<const double> v_hat) {
  const Moments m = moments(v, v_hat);
  if (m.est_energy == 0.0) return {-kSdrCap, true};
  const double alpha = m.cross / m.ref_energy;
  double den = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double r = v[i] - v_hat[i];
    den += r * r;
  }
  return clamp_db(alpha * alpha * m.ref_energy, den);
}

double se_loss(std::span<const double> v, std::span<const double> v_hat) {
  return -sd_sdr(v, v_hat).value_db;
}

SeLossGrad se_loss_grad(std::span<const double> v, std::span<const double> v_hat) {
  const Moments m = moments(v, v_hat);
  const std::size_t n = v.size();
  SeLossGrad out;
  out.d_reference.assign(n, 0.0);
  out.d_estimate.assign(n, 0.0);
  if (m.est_energy == 0.0) {
    out.value = kSdrCap;
    out.capped = true;
    return out;
  }
  const double alpha = m.cross / m.ref_energy;
  const double num = alpha * alpha * m.ref_energy;
  double den = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = v[i] - v_hat[i];
    den += r * r;
  }
  const SdrResult sdr = clamp_db(num, den);
  out.value = -sdr.value_db;
  out.capped = sdr.capped;
  if (sdr.capped) return out;

  // L = -(10 / ln 10) * (ln(num + eps) - ln(den + eps))
  // num = <v_hat, v>^2 / <v, v>, den = |v - v_hat|^2
  const double k = -10.0 / std::numbers::ln10;
  const double inv_num = 1.0 / (num + kSdrEpsilon);
  const double inv_den = 1.0 / (den + kSdrEpsilon);
  const double a = m.cross;
  const double e = m.ref_energy;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = v[i] - v_hat[i];
    const double dnum_dest = 2.0 * a * v[i] / e;
    const double dnum_dref = 2.0 * a * v_hat[i] / e - 2.0 * a * a * v[i] / (e * e);
    out.d_estimate[i] = k * (dnum_dest * inv_num + 2.0 * r * inv_den);
    out.d_reference[i] = k * (dnum_dref * inv_num - 2.0 * r * inv_den);
  }
  return out;
}

double si_sdr_improvement(std::span<const double> s, std::span<const double> x,
                          std::span<const double> y) {
  return si_sdr(s, y).value_db - si_sdr(s, x).value_db;
}

}  // namespace psenh
