#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "qkernel/error.hpp"

namespace qkernel {

/// Dense row-major 2-D array.
///
/// Shape is fixed at construction and never empty. For floating-point element
/// types every element is checked for finiteness on construction, so a
/// `Matrix` that exists is always valid input for the quantizers.
template <class T>
class DenseMatrix {
 public:
  using value_type = T;

  DenseMatrix(std::size_t rows, std::size_t cols) : DenseMatrix(rows, cols, std::vector<T>(rows * cols, T{})) {}

  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<T> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (rows_ == 0 || cols_ == 0) {
      throw SizeError("matrix dimensions must be positive, got " + std::to_string(rows_) + "x" +
                      std::to_string(cols_));
    }
    if (data_.size() != rows_ * cols_) {
      throw SizeError("matrix " + std::to_string(rows_) + "x" + std::to_string(cols_) + " needs " +
                      std::to_string(rows_ * cols_) + " elements, got " + std::to_string(data_.size()));
    }
    if constexpr (std::is_floating_point_v<T>) {
      for (std::size_t k = 0; k < data_.size(); ++k) {
        if (!std::isfinite(data_[k])) throw ValidationError(k / cols_, k % cols_);
      }
    }
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }

  const T& operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * cols_ + j]; }
  T& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }

  std::span<const T> row(std::size_t i) const noexcept { return {data_.data() + i * cols_, cols_}; }
  std::span<const T> data() const noexcept { return data_; }
  std::span<T> data() noexcept { return data_; }

  DenseMatrix transposed() const {
    DenseMatrix out(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) out(j, i) = (*this)(i, j);
    return out;
  }

  /// Same elements in row-major order, new shape.
  DenseMatrix reshaped(std::size_t rows, std::size_t cols) const {
    if (rows * cols != size()) {
      throw SizeError("cannot reshape " + std::to_string(rows_) + "x" + std::to_string(cols_) + " to " +
                      std::to_string(rows) + "x" + std::to_string(cols));
    }
    return DenseMatrix(rows, cols, data_);
  }

  friend bool operator==(const DenseMatrix&, const DenseMatrix&) = default;

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<T> data_;
};

using Matrix = DenseMatrix<double>;
using CodeMatrix = DenseMatrix<std::int32_t>;
using Mask = DenseMatrix<std::uint8_t>;

/// Absolute maximum of every row.
inline std::vector<double> row_abs_max(const Matrix& m) {
  std::vector<double> out(m.rows(), 0.0);
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (double v : m.row(i)) out[i] = std::max(out[i], std::abs(v));
  return out;
}

/// Absolute maximum of every column.
inline std::vector<double> col_abs_max(const Matrix& m) {
  std::vector<double> out(m.cols(), 0.0);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    auto r = m.row(i);
    for (std::size_t j = 0; j < m.cols(); ++j) out[j] = std::max(out[j], std::abs(r[j]));
  }
  return out;
}

inline Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw SizeError("matmul shape mismatch: " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) + " * " +
                    std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
  }
  std::vector<double> out(a.rows() * b.cols(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double* dst = out.data() + i * b.cols();
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      auto brow = b.row(k);
      for (std::size_t j = 0; j < b.cols(); ++j) dst[j] += aik * brow[j];
    }
  }
  return Matrix(a.rows(), b.cols(), std::move(out));
}

inline double frobenius_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

inline double frobenius_distance(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw SizeError("frobenius_distance shape mismatch");
  double s = 0.0;
  auto da = a.data();
  auto db = b.data();
  for (std::size_t k = 0; k < da.size(); ++k) {
    const double d = da[k] - db[k];
    s += d * d;
  }
  return std::sqrt(s);
}

}  // namespace qkernel
