#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>

#include "missclust/eigen_map.hpp"
#include "missclust/matrix.hpp"

namespace missclust {

struct CompletionConfig {
  std::optional<double> tau;   // shrinkage level; default 5 * sqrt(n * d)
  std::optional<double> step;  // gradient step delta; default 1.2 / fraction_observed
  std::size_t max_iter = 500;
  double tol = 1e-4;  // relative residual on observed entries
};

struct CompletionResult {
  Matrix completed;
  std::size_t iterations = 0;
  double final_residual = 0.0;
  bool converged = false;
};

// Proximal operator of the nuclear norm: U * max(S - tau, 0) * V^T.
inline Matrix shrink_singular_values(const Matrix& m, double tau) {
  if (tau < 0.0) throw std::invalid_argument("shrink_singular_values: tau must be nonnegative");
  Eigen::MatrixXd dense = detail::as_eigen(m);
  Eigen::BDCSVD<Eigen::MatrixXd> svd(dense, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  Eigen::Index r = 0;
  while (r < s.size() && s(r) > tau) ++r;  // descending order
  Matrix out(m.rows(), m.cols());
  if (r == 0) return out;
  Eigen::VectorXd kept = s.head(r).array() - tau;
  detail::as_eigen(out) =
      svd.matrixU().leftCols(r) * kept.asDiagonal() * svd.matrixV().leftCols(r).transpose();
  return out;
}

// Singular value thresholding for nuclear-norm completion. Dual iterate Y
// starts at zero; each step shrinks Y and pushes the observed-entry residual
// back in. Hitting the iteration cap reports converged = false, it never
// throws.
inline CompletionResult complete(const MaskedMatrix& masked, const CompletionConfig& cfg = {}) {
  const std::size_t n = masked.rows(), d = masked.cols();
  if (cfg.max_iter == 0) throw std::invalid_argument("complete: max_iter must be positive");
  if (!(cfg.tol > 0.0 && cfg.tol < 1.0)) throw std::invalid_argument("complete: tol must be in (0,1)");
  const std::size_t n_obs = masked.observed_count();
  if (n_obs == 0) throw std::invalid_argument("complete: empty mask");

  const double fraction_observed =
      static_cast<double>(n_obs) / static_cast<double>(n * d);
  const double tau = cfg.tau.value_or(5.0 * std::sqrt(static_cast<double>(n * d)));
  const double delta = cfg.step.value_or(1.2 / fraction_observed);
  if (!(tau > 0.0) || !(delta > 0.0))
    throw std::invalid_argument("complete: tau and step must be positive");

  const Matrix& m = masked.values();
  double denom = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j)
      if (masked.observed(i, j)) denom += m(i, j) * m(i, j);
  denom = std::sqrt(denom);

  Matrix y(n, d);
  CompletionResult result;
  for (std::size_t it = 1; it <= cfg.max_iter; ++it) {
    result.completed = shrink_singular_values(y, tau);
    result.iterations = it;
    double rss = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < d; ++j)
        if (masked.observed(i, j)) {
          const double r = m(i, j) - result.completed(i, j);
          rss += r * r;
        }
    result.final_residual = denom > 0.0 ? std::sqrt(rss) / denom : 0.0;
    if (result.final_residual <= cfg.tol) {
      result.converged = true;
      break;
    }
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < d; ++j)
        if (masked.observed(i, j)) y(i, j) += delta * (m(i, j) - result.completed(i, j));
  }
  return result;
}

}  // namespace missclust
