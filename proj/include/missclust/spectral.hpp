#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "missclust/eigen_map.hpp"
#include "missclust/kmeans.hpp"
#include "missclust/labeling.hpp"
#include "missclust/matrix.hpp"
#include "missclust/rng.hpp"

namespace missclust {

// Gaussian RBF similarity. Without an explicit bandwidth the median of all
// pairwise Euclidean distances is used.
struct SimilarityConfig {
  std::optional<double> bandwidth;  // sigma; nullopt selects the median heuristic
};

struct LaplacianBundle {
  Matrix w;                    // symmetric weights, zero diagonal
  std::vector<double> d_diag;  // degrees, all > 0
  Matrix l;                    // normalized Laplacian
};

enum class TwoClusterRule { ThresholdZero, Kmeans };

struct SpectralConfig {
  std::size_t k = 2;
  std::size_t embedding_dim = 0;  // 0 means k
  TwoClusterRule two_cluster_rule = TwoClusterRule::ThresholdZero;
  KmeansConfig kmeans_config;
};

// W_ij = exp(-|x_i - x_j|^2 / (2 sigma^2)), W_ii = 0.
inline Matrix similarity_matrix(const Matrix& points, const SimilarityConfig& cfg) {
  const std::size_t n = points.rows(), d = points.cols();
  if (n < 2) throw std::invalid_argument("similarity_matrix: need at least two points");
  if (cfg.bandwidth && !(*cfg.bandwidth > 0.0))
    throw std::invalid_argument("similarity_matrix: bandwidth must be positive");

  Matrix sq(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      double s = 0.0;
      const double* a = points.row(i);
      const double* b = points.row(j);
      for (std::size_t c = 0; c < d; ++c) {
        const double diff = a[c] - b[c];
        s += diff * diff;
      }
      sq(i, j) = sq(j, i) = s;
    }

  double sigma;
  if (cfg.bandwidth) {
    sigma = *cfg.bandwidth;
  } else {
    std::vector<double> dists;
    dists.reserve(n * (n - 1) / 2);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) dists.push_back(std::sqrt(sq(i, j)));
    std::sort(dists.begin(), dists.end());
    const std::size_t m = dists.size();
    sigma = (m % 2 == 1) ? dists[m / 2] : 0.5 * (dists[m / 2 - 1] + dists[m / 2]);
    if (sigma == 0.0)
      throw std::invalid_argument("similarity_matrix: median pairwise distance is zero");
  }

  Matrix w(n, n);
  const double inv = 1.0 / (2.0 * sigma * sigma);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) w(i, j) = w(j, i) = std::exp(-sq(i, j) * inv);
  return w;
}

// L = D^{-1/2} (D - W) D^{-1/2}, elementwise delta_ij - w_ij / sqrt(d_i d_j).
inline LaplacianBundle normalized_laplacian(const Matrix& w) {
  const std::size_t n = w.rows();
  if (w.cols() != n) throw std::invalid_argument("normalized_laplacian: W must be square");
  for (std::size_t i = 0; i < n; ++i) {
    if (w(i, i) != 0.0) throw std::invalid_argument("normalized_laplacian: nonzero diagonal");
    for (std::size_t j = i + 1; j < n; ++j) {
      if (std::abs(w(i, j) - w(j, i)) > 1e-10)
        throw std::invalid_argument("normalized_laplacian: W not symmetric");
      if (w(i, j) < 0.0) throw std::invalid_argument("normalized_laplacian: negative weight");
    }
  }
  std::vector<double> deg(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) deg[i] += w(i, j);
  for (std::size_t i = 0; i < n; ++i)
    if (!(deg[i] > 0.0))
      throw std::invalid_argument("normalized_laplacian: isolated vertex (zero degree)");

  Matrix l(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    l(i, i) = 1.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      const double v = -w(i, j) / std::sqrt(deg[i] * deg[j]);
      l(i, j) = l(j, i) = v;
    }
  }
  return LaplacianBundle{.w = w, .d_diag = std::move(deg), .l = std::move(l)};
}

// Columns are unit eigenvectors of L for the dim smallest eigenvalues, in
// ascending eigenvalue order. Each column's sign is fixed so its
// largest-magnitude entry (first such entry on ties) is positive, which makes
// the y = 0 threshold below deterministic.
inline Matrix spectral_embed(const LaplacianBundle& bundle, std::size_t dim) {
  const std::size_t n = bundle.l.rows();
  if (dim == 0 || dim > n) throw std::invalid_argument("spectral_embed: dim out of range");
  Eigen::MatrixXd l = detail::as_eigen(bundle.l);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(l);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("spectral_embed: eigensolver failed to converge");
  Matrix embedding(n, dim);
  for (std::size_t c = 0; c < dim; ++c) {
    Eigen::VectorXd v = solver.eigenvectors().col(static_cast<Eigen::Index>(c));
    v.normalize();
    std::size_t arg = 0;
    double best = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double mag = std::abs(v(static_cast<Eigen::Index>(i)));
      if (mag > best) {
        best = mag;
        arg = i;
      }
    }
    if (v(static_cast<Eigen::Index>(arg)) < 0.0) v = -v;
    for (std::size_t i = 0; i < n; ++i) embedding(i, c) = v(static_cast<Eigen::Index>(i));
  }
  return embedding;
}

// Full pipeline: similarity graph, normalized Laplacian, eigenvector
// embedding, then either the sign split of the second eigenvector (k = 2) or
// k-means on the embedding rows.
inline Labeling spectral_cluster(const Matrix& points, const SpectralConfig& cfg,
                                 const SimilarityConfig& sim, Rng& rng) {
  if (cfg.k < 2) throw std::invalid_argument("spectral_cluster: k must be at least 2");
  if (points.rows() < cfg.k) throw std::invalid_argument("spectral_cluster: fewer points than k");
  const std::size_t dim = cfg.embedding_dim == 0 ? cfg.k : cfg.embedding_dim;
  const auto bundle = normalized_laplacian(similarity_matrix(points, sim));
  const Matrix embedding = spectral_embed(bundle, dim);
  const std::size_t n = points.rows();

  if (cfg.k == 2 && cfg.two_cluster_rule == TwoClusterRule::ThresholdZero) {
    if (dim < 2) throw std::invalid_argument("spectral_cluster: threshold rule needs dim >= 2");
    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) labels[i] = embedding(i, 1) >= 0.0 ? 0 : 1;
    return Labeling(std::move(labels), 2);
  }
  return kmeans(embedding, cfg.k, cfg.kmeans_config, rng);
}

}  // namespace missclust
