// Copyright 2026 The psenh Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <string>
#include <vector>

namespace psenh {

using MatrixF = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic>;
using VectorF = Eigen::Matrix<float, Eigen::Dynamic, 1>;
using MapMatrixF = Eigen::Map<MatrixF, Eigen::Aligned>;
using ConstMapMatrixF = Eigen::Map<const MatrixF, Eigen::Aligned>;
using MapVectorF = Eigen::Map<VectorF, Eigen::Aligned>;
using ConstMapVectorF = Eigen::Map<const VectorF, Eigen::Aligned>;

// Vector-aligned so that Eigen's kernels see the same alignment every run.
using FloatBuffer = std::vector<float, Eigen::aligned_allocator<float>>;

// A named float tensor. Matrices are stored column-major as [rows, cols].
struct Tensor {
  std::string name;
  std::vector<int> shape;
  FloatBuffer data;

  std::size_t numel() const;
  int rows() const { return shape.empty() ? 1 : shape[0]; }
  int cols() const;

  MapMatrixF matrix() { return {data.data(), rows(), cols()}; }
  ConstMapMatrixF matrix() const { return {data.data(), rows(), cols()}; }
  MapVectorF vector() { return {data.data(), static_cast<Eigen::Index>(data.size())}; }
  ConstMapVectorF vector() const {
    return {data.data(), static_cast<Eigen::Index>(data.size())};
  }

  bool operator==(const Tensor &) const = default;
};

// Ordered collection of tensors; gradients use a zeroed clone.
class ParameterSet {
 public:
  std::size_t add(std::string name, std::vector<int> shape);

  Tensor &operator[](std::size_t i) { return tensors_[i]; }
  const Tensor &operator[](std::size_t i) const { return tensors_[i]; }
  std::size_t size() const { return tensors_.size(); }
  const std::vector<Tensor> &tensors() const { return tensors_; }
  std::vector<Tensor> &tensors() { return tensors_; }

  const Tensor *find(const std::string &name) const;
  std::size_t total_elements() const;

  ParameterSet zeros_like() const;
  void set_zero();
  double squared_norm() const;
  void scale(float s);

  // Copies values from `other`; throws ShapeError naming the first tensor whose
  // name or shape differs.
  void assign(const ParameterSet &other);

  bool operator==(const ParameterSet &) const = default;

 private:
  std::vector<Tensor> tensors_;
};

}  // namespace psenh
