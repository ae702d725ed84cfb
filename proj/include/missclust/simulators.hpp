#pragma once

#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

#include "missclust/labeling.hpp"
#include "missclust/lpa.hpp"
#include "missclust/matrix.hpp"
#include "missclust/metrics.hpp"
#include "missclust/rng.hpp"
#include "missclust/spectral.hpp"

namespace missclust {

struct Dataset {
  Matrix points;
  Labeling truth;
};

// Two spherical Gaussian clusters in dim dimensions: cluster 0 centered at the
// origin, cluster 1 at a * (1, ..., 1), unit variance.
struct TwoGaussianSpec {
  double a = 1.0;
  std::size_t n_total = 500;
  double proportion_cluster1 = 0.5;
  std::size_t dim = 2;
};

// Each row joins cluster 1 with probability proportion_cluster1, so cluster
// sizes are Binomial(n_total, p) and vary trial to trial. A draw leaving either
// cluster empty is rejected, up to 100 times.
inline Dataset gen_two_gaussians(const TwoGaussianSpec& spec, Rng& rng) {
  if (!(spec.a >= 0.0)) throw std::invalid_argument("gen_two_gaussians: a must be nonnegative");
  if (!(spec.proportion_cluster1 > 0.0 && spec.proportion_cluster1 < 1.0))
    throw std::invalid_argument("gen_two_gaussians: proportion must be in (0,1)");
  if (spec.n_total < 2 || spec.dim == 0)
    throw std::invalid_argument("gen_two_gaussians: degenerate size");

  std::vector<int> labels(spec.n_total);
  for (int attempt = 0; attempt < 100; ++attempt) {
    std::size_t n1 = 0;
    for (std::size_t i = 0; i < spec.n_total; ++i) {
      labels[i] = rng.uniform01() < spec.proportion_cluster1 ? 1 : 0;
      n1 += static_cast<std::size_t>(labels[i]);
    }
    if (n1 == 0 || n1 == spec.n_total) continue;
    Matrix points(spec.n_total, spec.dim);
    for (std::size_t i = 0; i < spec.n_total; ++i) {
      const double mean = labels[i] == 1 ? spec.a : 0.0;
      for (std::size_t j = 0; j < spec.dim; ++j) points(i, j) = mean + rng.normal();
    }
    return Dataset{.points = std::move(points), .truth = Labeling(labels, 2)};
  }
  throw std::runtime_error("gen_two_gaussians: both clusters empty after 100 attempts");
}

// Two-population matrix: the top half has block-constant column means rising
// by mean_step per block_width columns, the bottom half is standard normal.
struct BlockMeanSpec {
  std::size_t n = 1000;
  std::size_t d = 100;
  std::size_t block_width = 10;
  double mean_step = 0.1;
};

inline Dataset gen_block_mean(const BlockMeanSpec& spec, Rng& rng) {
  if (spec.n < 2 || spec.n % 2 != 0)
    throw std::invalid_argument("gen_block_mean: n must be even and positive");
  if (spec.block_width == 0 || spec.d % spec.block_width != 0)
    throw std::invalid_argument("gen_block_mean: block_width must divide d");
  const std::size_t half = spec.n / 2;
  Matrix points(spec.n, spec.d);
  std::vector<int> labels(spec.n);
  for (std::size_t i = 0; i < spec.n; ++i) {
    const bool top = i < half;
    labels[i] = top ? 0 : 1;
    for (std::size_t j = 0; j < spec.d; ++j) {
      const double mean =
          top ? spec.mean_step * static_cast<double>(j / spec.block_width + 1) : 0.0;
      points(i, j) = mean + rng.normal();
    }
  }
  return Dataset{.points = std::move(points), .truth = Labeling(std::move(labels), 2)};
}

struct ConsistentPopulationConfig {
  SpectralConfig spectral;
  SimilarityConfig similarity;
  EmConfig em;
};

struct ConsistentPopulation {
  std::vector<std::size_t> indices;  // rows where both methods agree
  Labeling labels;                   // the agreed label per retained row
};

// Runs spectral clustering and LPA on complete data, aligns the two labelings
// by the best label permutation, and keeps the rows where they agree. The
// agreed labels act as surrogate ground truth for downstream masking
// experiments.
inline ConsistentPopulation consistent_population(const Matrix& data, std::size_t k,
                                                  const ConsistentPopulationConfig& cfg,
                                                  Rng& rng) {
  SpectralConfig scfg = cfg.spectral;
  scfg.k = k;
  Rng sc_rng = rng.split(0);
  Rng lpa_rng = rng.split(1);
  const Labeling sc = spectral_cluster(data, scfg, cfg.similarity, sc_rng);
  const LpaFitResult lpa = lpa_fit(data, k, cfg.em, lpa_rng);
  const Labeling lp = lpa_assign(lpa.model, data);

  const auto perm = ccr_alignment(lp, sc);  // perm[lpa label] = spectral label
  ConsistentPopulation out;
  std::vector<int> agreed;
  for (std::size_t i = 0; i < data.rows(); ++i) {
    if (perm[lp.labels[i]] == sc.labels[i]) {
      out.indices.push_back(i);
      agreed.push_back(sc.labels[i]);
    }
  }
  if (out.indices.empty())
    throw std::runtime_error("consistent_population: methods agree on no rows");
  out.labels = Labeling(std::move(agreed), static_cast<int>(k));
  return out;
}

// Uniform sample of rows without replacement, labels co-indexed.
inline Dataset subsample_rows(const Matrix& data, const Labeling& labels, std::size_t n_sample,
                              Rng& rng) {
  const std::size_t n = data.rows();
  if (labels.size() != n) throw std::invalid_argument("subsample_rows: label length mismatch");
  if (n_sample == 0 || n_sample > n)
    throw std::invalid_argument("subsample_rows: n_sample out of range");
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  for (std::size_t i = 0; i < n_sample; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.uniform_below(n - i));
    std::swap(idx[i], idx[j]);
  }
  Matrix points(n_sample, data.cols());
  std::vector<int> out_labels(n_sample);
  for (std::size_t i = 0; i < n_sample; ++i) {
    for (std::size_t j = 0; j < data.cols(); ++j) points(i, j) = data(idx[i], j);
    out_labels[i] = labels.labels[idx[i]];
  }
  return Dataset{.points = std::move(points), .truth = Labeling(std::move(out_labels), labels.k)};
}

}  // namespace missclust
