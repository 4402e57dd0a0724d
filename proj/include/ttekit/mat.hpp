#pragma once

// Dense row-major matrix. Vectors are n x 1.

#include <cassert>
#include <cstddef>
#include <vector>

namespace ttekit {

template <typename T>
class Mat {
 public:
  Mat() = default;
  Mat(int rows, int cols) : rows_(rows), cols_(cols), v_(static_cast<std::size_t>(rows) * cols, T{0}) {
    assert(rows >= 0 && cols >= 0);
  }
  Mat(int rows, int cols, std::vector<T> values) : rows_(rows), cols_(cols), v_(std::move(values)) {
    assert(v_.size() == static_cast<std::size_t>(rows) * cols);
  }

  static Mat zeros(int rows, int cols) { return Mat(rows, cols); }
  static Mat filled(int rows, int cols, T value) {
    Mat m(rows, cols);
    m.fill(value);
    return m;
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t size() const { return v_.size(); }
  bool empty() const { return v_.empty(); }

  T* data() { return v_.data(); }
  const T* data() const { return v_.data(); }
  T* row(int r) { return v_.data() + static_cast<std::size_t>(r) * cols_; }
  const T* row(int r) const { return v_.data() + static_cast<std::size_t>(r) * cols_; }

  T& operator()(int r, int c) { return v_[static_cast<std::size_t>(r) * cols_ + c]; }
  T operator()(int r, int c) const { return v_[static_cast<std::size_t>(r) * cols_ + c]; }
  T& operator[](std::size_t i) { return v_[i]; }
  T operator[](std::size_t i) const { return v_[i]; }

  void fill(T value) { std::fill(v_.begin(), v_.end(), value); }
  void set_zero() { fill(T{0}); }

  bool same_shape(const Mat& other) const { return rows_ == other.rows_ && cols_ == other.cols_; }

  // Reinterpret as a different shape with identical element count.
  Mat reshaped(int rows, int cols) const {
    assert(static_cast<std::size_t>(rows) * cols == v_.size());
    return Mat(rows, cols, v_);
  }

  Mat top_rows(int n) const {
    assert(n <= rows_);
    return Mat(n, cols_, std::vector<T>(v_.begin(), v_.begin() + static_cast<std::size_t>(n) * cols_));
  }

  template <typename U>
  Mat<U> cast() const {
    Mat<U> out(rows_, cols_);
    for (std::size_t i = 0; i < v_.size(); ++i) out[i] = static_cast<U>(v_[i]);
    return out;
  }

  const std::vector<T>& values() const { return v_; }

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<T> v_;
};

using MatF = Mat<float>;
using MatD = Mat<double>;

}  // namespace ttekit
