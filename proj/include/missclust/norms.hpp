#pragma once

#include <cmath>
#include <stdexcept>

#include "missclust/eigen_map.hpp"
#include "missclust/matrix.hpp"

namespace missclust {

inline double frobenius_norm(const Matrix& m) {
  double s = 0.0;
  const double* p = m.data();
  for (std::size_t i = 0, n = m.size(); i < n; ++i) s += p[i] * p[i];
  return std::sqrt(s);
}

// Largest singular value.
inline double spectral_norm(const Matrix& m) {
  Eigen::JacobiSVD<detail::EigenRowMajor> svd;
  if (m.rows() >= 32 || m.cols() >= 32) {
    Eigen::BDCSVD<detail::EigenRowMajor> big(detail::as_eigen(m));
    return big.singularValues()(0);
  }
  svd.compute(detail::as_eigen(m));
  return svd.singularValues()(0);
}

inline double relative_frobenius(const Matrix& x, const Matrix& xhat) {
  if (!x.same_shape(xhat)) throw std::invalid_argument("relative_frobenius: shape mismatch");
  const double denom = frobenius_norm(x);
  if (denom == 0.0) throw std::invalid_argument("relative_frobenius: reference matrix is zero");
  double s = 0.0;
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = 0; j < x.cols(); ++j) {
      const double d = x(i, j) - xhat(i, j);
      s += d * d;
    }
  return std::sqrt(s) / denom;
}

}  // namespace missclust
