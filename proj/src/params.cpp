// Copyright 2026 The psenh Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "psenh/params.hpp"

#include <numeric>

#include "psenh/errors.hpp"

namespace psenh {

namespace {

std::string shape_str(const std::vector<int> &s) {
  std::string out = "[";
  for (std::size_t i = 0; i < s.size(); ++i) out += (i ? "," : "") + std::to_string(s[i]);
  return out + "]";
}

}  // namespace

std::size_t Tensor::numel() const {
  std::size_t n = 1;
  for (int d : shape) n *= static_cast<std::size_t>(d);
  return n;
}

int Tensor::cols() const {
  if (shape.size() < 2) return 1;
  int c = 1;
  for (std::size_t i = 1; i < shape.size(); ++i) c *= shape[i];
  return c;
}

std::size_t ParameterSet::add(std::string name, std::vector<int> shape) {
  Tensor t{std::move(name), std::move(shape), {}};
  t.data.assign(t.numel(), 0.0f);
  tensors_.push_back(std::move(t));
  return tensors_.size() - 1;
}

const Tensor *ParameterSet::find(const std::string &name) const {
  for (const auto &t : tensors_) {
    if (t.name == name) return &t;
  }
  return nullptr;
}

std::size_t ParameterSet::total_elements() const {
  std::size_t n = 0;
  for (const auto &t : tensors_) n += t.data.size();
  return n;
}

ParameterSet ParameterSet::zeros_like() const {
  ParameterSet out;
  for (const auto &t : tensors_) out.add(t.name, t.shape);
  return out;
}

void ParameterSet::set_zero() {
  for (auto &t : tensors_) std::fill(t.data.begin(), t.data.end(), 0.0f);
}

double ParameterSet::squared_norm() const {
  double s = 0.0;
  for (const auto &t : tensors_) {
    for (float v : t.data) s += static_cast<double>(v) * v;
  }
  return s;
}

void ParameterSet::scale(float s) {
  for (auto &t : tensors_) {
    for (float &v : t.data) v *= s;
  }
}

void ParameterSet::assign(const ParameterSet &other) {
  if (other.tensors_.size() != tensors_.size()) {
    throw ShapeError("parameter set has " + std::to_string(other.tensors_.size()) +
                     " tensors, model expects " + std::to_string(tensors_.size()));
  }
  for (std::size_t i = 0; i < tensors_.size(); ++i) {
    const auto &src = other.tensors_[i];
    const auto &dst = tensors_[i];
    if (src.name != dst.name || src.shape != dst.shape) {
      throw ShapeError("tensor '" + dst.name + "' expects shape " + shape_str(dst.shape) +
                       " but got '" + src.name + "' " + shape_str(src.shape));
    }
  }
  for (std::size_t i = 0; i < tensors_.size(); ++i) tensors_[i].data = other.tensors_[i].data;
}

}  // namespace psenh
