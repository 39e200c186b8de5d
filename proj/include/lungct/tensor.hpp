#pragma once

#include <cstddef>
#include <numeric>
#include <vector>

#include "lungct/errors.hpp"

namespace lungct {

// Dense row-major tensor, rank 1..4. This is deliberately minimal: shape plus
// a contiguous buffer. All heavy math happens in the nn ops, which work on the
// raw buffers.
template <class T>
class Tensor {
 public:
  Tensor() = default;

  explicit Tensor(std::vector<int> shape) { reset(std::move(shape)); }

  Tensor(std::initializer_list<int> shape) { reset(std::vector<int>(shape)); }

  void reset(std::vector<int> shape) {
    for (int d : shape) {
      if (d <= 0) throw validation_error("tensor dimension must be positive");
    }
    shape_ = std::move(shape);
    std::size_t n = 1;
    for (int d : shape_) n *= static_cast<std::size_t>(d);
    data_.assign(n, T{});
    compute_strides();
  }

  bool empty() const { return data_.empty(); }
  int rank() const { return static_cast<int>(shape_.size()); }
  int dim(int i) const { return shape_[static_cast<std::size_t>(i)]; }
  const std::vector<int>& shape() const { return shape_; }
  std::size_t size() const { return data_.size(); }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }
  std::vector<T>& storage() { return data_; }
  const std::vector<T>& storage() const { return data_; }

  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  T& operator()(int a) { return data_[static_cast<std::size_t>(a)]; }
  const T& operator()(int a) const { return data_[static_cast<std::size_t>(a)]; }

  T& operator()(int a, int b) { return data_[idx2(a, b)]; }
  const T& operator()(int a, int b) const { return data_[idx2(a, b)]; }

  T& operator()(int a, int b, int c) { return data_[idx3(a, b, c)]; }
  const T& operator()(int a, int b, int c) const { return data_[idx3(a, b, c)]; }

  T& operator()(int a, int b, int c, int d) { return data_[idx4(a, b, c, d)]; }
  const T& operator()(int a, int b, int c, int d) const { return data_[idx4(a, b, c, d)]; }

  void fill(T v) { std::fill(data_.begin(), data_.end(), v); }

  bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }

  template <class U>
  Tensor<U> cast() const {
    Tensor<U> out(shape_);
    for (std::size_t i = 0; i < data_.size(); ++i) out[i] = static_cast<U>(data_[i]);
    return out;
  }

  friend bool operator==(const Tensor& a, const Tensor& b) {
    return a.shape_ == b.shape_ && a.data_ == b.data_;
  }

 private:
  std::size_t idx2(int a, int b) const {
    return static_cast<std::size_t>(a) * strides_[0] + static_cast<std::size_t>(b);
  }
  std::size_t idx3(int a, int b, int c) const {
    return static_cast<std::size_t>(a) * strides_[0] +
           static_cast<std::size_t>(b) * strides_[1] + static_cast<std::size_t>(c);
  }
  std::size_t idx4(int a, int b, int c, int d) const {
    return static_cast<std::size_t>(a) * strides_[0] +
           static_cast<std::size_t>(b) * strides_[1] +
           static_cast<std::size_t>(c) * strides_[2] + static_cast<std::size_t>(d);
  }

  void compute_strides() {
    strides_.assign(shape_.size(), 1);
    for (int i = static_cast<int>(shape_.size()) - 2; i >= 0; --i) {
      strides_[static_cast<std::size_t>(i)] =
          strides_[static_cast<std::size_t>(i) + 1] *
          static_cast<std::size_t>(shape_[static_cast<std::size_t>(i) + 1]);
    }
  }

  std::vector<int> shape_;
  std::vector<std::size_t> strides_;
  std::vector<T> data_;
};

}  // namespace lungct
