#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <array>
#include <cstddef>
#include <initializer_list>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <utility>

#include "hullsight/errors.hpp"

namespace hullsight {

using Index = Eigen::Index;

// Extents of a 4-D (N, C, H, W) tensor. Lower-rank data uses singleton extents.
struct Shape {
  Index n = 0;
  Index c = 0;
  Index h = 0;
  Index w = 0;

  constexpr Index numel() const { return n * c * h * w; }
  constexpr Index plane() const { return h * w; }
  friend constexpr bool operator==(const Shape&, const Shape&) = default;
};

inline std::string to_string(const Shape& s) {
  std::ostringstream os;
  os << '(' << s.n << ',' << s.c << ',' << s.h << ',' << s.w << ')';
  return os.str();
}

inline std::ostream& operator<<(std::ostream& os, const Shape& s) { return os << to_string(s); }

inline constexpr Shape kScalarShape{1, 1, 1, 1};

// Raised when an operand does not have the extents an operation needs.
// `node` is filled in by the graph when the failure happens inside one.
class ShapeError : public Error {
 public:
  ShapeError(std::string node, Shape expected, Shape actual, const std::string& what)
      : Error(format(node, expected, actual, what)),
        node_(std::move(node)),
        expected_(expected),
        actual_(actual),
        detail_(what) {}

  const std::string& node() const { return node_; }
  Shape expected() const { return expected_; }
  Shape actual() const { return actual_; }
  const std::string& detail() const { return detail_; }

  ShapeError with_node(std::string node) const { return {std::move(node), expected_, actual_, detail_}; }

 private:
  static std::string format(const std::string& node, Shape e, Shape a, const std::string& what) {
    std::string msg = "shape mismatch";
    if (!node.empty()) msg += " at node '" + node + "'";
    msg += ": expected " + to_string(e) + ", got " + to_string(a);
    if (!what.empty()) msg += " (" + what + ")";
    return msg;
  }

  std::string node_;
  Shape expected_;
  Shape actual_;
  std::string detail_;
};

// Dense row-major (N, C, H, W) tensor backed by an Eigen column array.
template <typename Scalar_>
class Tensor {
 public:
  using Scalar = Scalar_;
  using Array = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

  Tensor() = default;

  explicit Tensor(Shape shape) : shape_(check(shape)), data_(Array::Zero(shape.numel())) {}

  Tensor(Shape shape, Array data) : shape_(check(shape)), data_(std::move(data)) {
    if (data_.size() != shape_.numel()) {
      throw ValueError("tensor data length " + std::to_string(data_.size()) + " does not match shape " +
                       to_string(shape_));
    }
  }

  Tensor(Shape shape, std::initializer_list<Scalar> values) : Tensor(shape, from_list(values)) {}

  static Tensor zeros(Shape shape) { return Tensor(shape); }
  static Tensor constant(Shape shape, Scalar v) { return Tensor(shape, Array::Constant(shape.numel(), v)); }
  static Tensor scalar(Scalar v) { return constant(kScalarShape, v); }

  const Shape& shape() const { return shape_; }
  Index n() const { return shape_.n; }
  Index c() const { return shape_.c; }
  Index h() const { return shape_.h; }
  Index w() const { return shape_.w; }
  Index size() const { return data_.size(); }
  bool empty() const { return data_.size() == 0; }

  const Array& array() const { return data_; }
  Array& array() { return data_; }
  const Scalar* data() const { return data_.data(); }
  Scalar* data() { return data_.data(); }
  std::span<const Scalar> values() const { return {data_.data(), static_cast<std::size_t>(data_.size())}; }
  std::span<Scalar> values() { return {data_.data(), static_cast<std::size_t>(data_.size())}; }

  Index offset(Index n, Index c, Index y, Index x) const {
    return ((n * shape_.c + c) * shape_.h + y) * shape_.w + x;
  }
  Scalar operator()(Index n, Index c, Index y, Index x) const { return data_[offset(n, c, y, x)]; }
  Scalar& operator()(Index n, Index c, Index y, Index x) { return data_[offset(n, c, y, x)]; }
  Scalar operator[](Index i) const { return data_[i]; }
  Scalar& operator[](Index i) { return data_[i]; }

  // Pointer to the (n, c) plane of H*W contiguous values.
  const Scalar* plane(Index n, Index c) const { return data_.data() + (n * shape_.c + c) * shape_.plane(); }
  Scalar* plane(Index n, Index c) { return data_.data() + (n * shape_.c + c) * shape_.plane(); }

  // Scalar value of a (1,1,1,1) tensor.
  Scalar item() const {
    if (shape_ != kScalarShape) throw ShapeError({}, kScalarShape, shape_, "item() needs a scalar tensor");
    return data_[0];
  }

  template <typename To>
  Tensor<To> cast() const {
    return Tensor<To>(shape_, data_.template cast<To>());
  }

  friend bool operator==(const Tensor& a, const Tensor& b) {
    return a.shape_ == b.shape_ && (a.data_ == b.data_).all();
  }

 private:
  static Shape check(Shape s) {
    if (s.n < 0 || s.c < 0 || s.h < 0 || s.w < 0) {
      throw ValueError("negative tensor extent in " + to_string(s));
    }
    return s;
  }
  static Array from_list(std::initializer_list<Scalar> values) {
    Array a(static_cast<Index>(values.size()));
    std::copy(values.begin(), values.end(), a.data());
    return a;
  }

  Shape shape_{};
  Array data_;
};

using TensorF = Tensor<float>;
using TensorD = Tensor<double>;

inline void require_same_shape(const Shape& expected, const Shape& actual, const char* what) {
  if (expected != actual) throw ShapeError({}, expected, actual, what);
}

}  // namespace hullsight
