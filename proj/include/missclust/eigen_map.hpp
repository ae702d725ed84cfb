#pragma once

#include <Eigen/Dense>

#include "missclust/matrix.hpp"

namespace missclust::detail {

using EigenRowMajor =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Zero-copy views over Matrix's row-major storage.
inline Eigen::Map<const EigenRowMajor> as_eigen(const Matrix& m) {
  return {m.data(), static_cast<Eigen::Index>(m.rows()), static_cast<Eigen::Index>(m.cols())};
}

inline Eigen::Map<EigenRowMajor> as_eigen(Matrix& m) {
  return {m.data(), static_cast<Eigen::Index>(m.rows()), static_cast<Eigen::Index>(m.cols())};
}

inline Matrix from_eigen(const EigenRowMajor& e) {
  Matrix m(static_cast<std::size_t>(e.rows()), static_cast<std::size_t>(e.cols()));
  as_eigen(m) = e;
  return m;
}

}  // namespace missclust::detail
