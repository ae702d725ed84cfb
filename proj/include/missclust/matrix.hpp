#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace missclust {

// Dense n x d matrix of doubles, row-major. Rows are individuals, columns are
// variables throughout the library.
class Matrix {
 public:
  Matrix() = default;

  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {
    if (rows == 0 || cols == 0) throw std::invalid_argument("Matrix: zero dimension");
  }

  static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    if (rows.size() == 0) throw std::invalid_argument("Matrix::from_rows: empty");
    const std::size_t d = rows.begin()->size();
    Matrix m(rows.size(), d);
    std::size_t i = 0;
    for (const auto& r : rows) {
      if (r.size() != d) throw std::invalid_argument("Matrix::from_rows: ragged rows");
      std::size_t j = 0;
      for (double v : r) m(i, j++) = v;
      ++i;
    }
    return m;
  }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  const double* row(std::size_t i) const { return data_.data() + i * cols_; }
  double* row(std::size_t i) { return data_.data() + i * cols_; }

  bool same_shape(const Matrix& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

  // No NaN/Inf may live inside a plain Matrix.
  bool all_finite() const {
    for (double v : data_)
      if (!std::isfinite(v)) return false;
    return true;
  }

  friend bool operator==(const Matrix& a, const Matrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// A Matrix plus an observation mask. mask(i,j) == 1 means values(i,j) is
// observed. Unobserved cells are zeroed at construction and must never be read
// by consumers; the zero is a sentinel, not data.
class MaskedMatrix {
 public:
  MaskedMatrix(Matrix values, std::vector<std::uint8_t> mask)
      : values_(std::move(values)), mask_(std::move(mask)) {
    if (mask_.size() != values_.size())
      throw std::invalid_argument("MaskedMatrix: mask shape mismatch");
    const std::size_t n = values_.rows(), d = values_.cols();
    std::vector<std::size_t> col_obs(d, 0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < d; ++j) {
        if (mask_[i * d + j]) {
          ++col_obs[j];
        } else {
          values_(i, j) = 0.0;
        }
      }
    for (std::size_t j = 0; j < d; ++j)
      if (col_obs[j] == 0)
        throw std::invalid_argument("MaskedMatrix: column " + std::to_string(j) +
                                    " has no observed entries");
  }

  static MaskedMatrix fully_observed(Matrix values) {
    std::vector<std::uint8_t> mask(values.size(), 1);
    return MaskedMatrix(std::move(values), std::move(mask));
  }

  std::size_t rows() const { return values_.rows(); }
  std::size_t cols() const { return values_.cols(); }

  const Matrix& values() const { return values_; }
  bool observed(std::size_t i, std::size_t j) const { return mask_[i * values_.cols() + j] != 0; }
  const std::vector<std::uint8_t>& mask() const { return mask_; }

  std::size_t observed_count() const {
    std::size_t c = 0;
    for (auto b : mask_) c += b;
    return c;
  }

 private:
  Matrix values_;
  std::vector<std::uint8_t> mask_;
};

}  // namespace missclust
