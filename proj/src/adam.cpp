// Copyright 2026 The psenh Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "psenh/adam.hpp"

#include <cmath>

#include "psenh/errors.hpp"

namespace psenh {

Adam::Adam(const ParameterSet &like, AdamConfig config)
    : config_(config), m_(like.zeros_like()), v_(like.zeros_like()) {}

void Adam::step(ParameterSet &params, const ParameterSet &grads) {
  if (params.size() != m_.size() || grads.size() != m_.size()) {
    throw ShapeError("optimizer state does not match the parameter set");
  }
  ++t_;
  const double b1 = config_.beta1, b2 = config_.beta2;
  const double c1 = 1.0 - std::pow(b1, t_);
  const double c2 = 1.0 - std::pow(b2, t_);
  const float step = static_cast<float>(config_.learning_rate * std::sqrt(c2) / c1);
  const float eps = static_cast<float>(config_.epsilon * std::sqrt(c2));
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto p = params[i].vector();
    const auto g = grads[i].vector();
    auto m = m_[i].vector();
    auto v = v_[i].vector();
    m = static_cast<float>(b1) * m + static_cast<float>(1.0 - b1) * g;
    v = static_cast<float>(b2) * v + static_cast<float>(1.0 - b2) * g.cwiseAbs2();
    p.array() -= step * m.array() / (v.array().sqrt() + eps);
  }
}

double clip_global_norm(ParameterSet &grads, double max_norm) {
  const double norm = std::sqrt(grads.squared_norm());
  if (max_norm > 0.0 && norm > max_norm) grads.scale(static_cast<float>(max_norm / norm));
  return norm;
}

}  // namespace psenh
