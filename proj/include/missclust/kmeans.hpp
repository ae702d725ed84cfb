#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

#include "missclust/labeling.hpp"
#include "missclust/matrix.hpp"
#include "missclust/rng.hpp"

namespace missclust {

struct KmeansConfig {
  std::size_t max_iter = 300;
  std::size_t restarts = 10;
  double tol = 1e-9;  // centroid movement threshold
};

struct KmeansResult {
  Labeling labeling;
  Matrix centroids;  // k x d
  double inertia = 0.0;
  std::size_t iterations = 0;
  std::vector<double> objective_history;  // non-increasing within the winning restart
  std::size_t best_restart = 0;
};

namespace detail {

inline double sq_dist(const double* a, const double* b, std::size_t d) {
  double s = 0.0;
  for (std::size_t j = 0; j < d; ++j) {
    const double diff = a[j] - b[j];
    s += diff * diff;
  }
  return s;
}

// k-means++ seeding: subsequent centers drawn proportional to squared distance
// from the nearest already-chosen center.
inline Matrix kmeanspp_seed(const Matrix& points, std::size_t k, Rng& rng) {
  const std::size_t n = points.rows(), d = points.cols();
  Matrix centers(k, d);
  std::vector<double> dist2(n, std::numeric_limits<double>::infinity());
  std::size_t first = static_cast<std::size_t>(rng.uniform_below(n));
  for (std::size_t j = 0; j < d; ++j) centers(0, j) = points(first, j);
  for (std::size_t c = 1; c < k; ++c) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d2 = sq_dist(points.row(i), centers.row(c - 1), d);
      if (d2 < dist2[i]) dist2[i] = d2;
      total += dist2[i];
    }
    std::size_t pick;
    if (total > 0.0) {
      const double target = rng.uniform01() * total;
      double acc = 0.0;
      pick = n - 1;
      for (std::size_t i = 0; i < n; ++i) {
        acc += dist2[i];
        if (acc > target) {
          pick = i;
          break;
        }
      }
    } else {
      pick = static_cast<std::size_t>(rng.uniform_below(n));  // all points coincide
    }
    for (std::size_t j = 0; j < d; ++j) centers(c, j) = points(pick, j);
  }
  return centers;
}

struct LloydOutcome {
  std::vector<int> labels;
  Matrix centroids;
  double inertia;
  std::size_t iterations;
  std::vector<double> history;
};

inline LloydOutcome lloyd(const Matrix& points, std::size_t k, const KmeansConfig& cfg, Rng rng) {
  const std::size_t n = points.rows(), d = points.cols();
  Matrix centers = kmeanspp_seed(points, k, rng);
  std::vector<int> labels(n, 0);
  std::vector<std::size_t> counts(k, 0);
  LloydOutcome out{.labels = {}, .centroids = Matrix(k, d), .inertia = 0.0, .iterations = 0,
                   .history = {}};

  auto assign = [&]() {
    double inertia = 0.0;
    std::fill(counts.begin(), counts.end(), std::size_t{0});
    for (std::size_t i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      int arg = 0;
      for (std::size_t c = 0; c < k; ++c) {
        const double d2 = sq_dist(points.row(i), centers.row(c), d);
        if (d2 < best) {
          best = d2;
          arg = static_cast<int>(c);
        }
      }
      labels[i] = arg;
      ++counts[arg];
      inertia += best;
    }
    return inertia;
  };

  double inertia = assign();
  out.history.push_back(inertia);
  for (std::size_t it = 0; it < cfg.max_iter; ++it) {
    out.iterations = it + 1;
    // Mean update; an empty cluster is reseeded from the point farthest from
    // its current centroid, which always lowers the objective.
    Matrix next(k, d);
    for (std::size_t i = 0; i < n; ++i) {
      const double* p = points.row(i);
      double* c = next.row(static_cast<std::size_t>(labels[i]));
      for (std::size_t j = 0; j < d; ++j) c[j] += p[j];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] > 0) {
        for (std::size_t j = 0; j < d; ++j) next(c, j) /= static_cast<double>(counts[c]);
      } else {
        std::size_t far = 0;
        double far_d2 = -1.0;
        for (std::size_t i = 0; i < n; ++i) {
          const double d2 =
              sq_dist(points.row(i), centers.row(static_cast<std::size_t>(labels[i])), d);
          if (d2 > far_d2) {
            far_d2 = d2;
            far = i;
          }
        }
        for (std::size_t j = 0; j < d; ++j) next(c, j) = points(far, j);
      }
    }
    double movement = 0.0;
    for (std::size_t c = 0; c < k; ++c)
      movement = std::max(movement, std::sqrt(sq_dist(next.row(c), centers.row(c), d)));
    centers = next;
    inertia = assign();
    out.history.push_back(inertia);
    if (movement < cfg.tol) break;
  }
  out.labels = labels;
  out.centroids = centers;
  out.inertia = inertia;
  return out;
}

}  // namespace detail

// Lloyd's algorithm with k-means++ restarts. Returns the restart with the
// lowest within-cluster sum of squares; ties keep the earliest restart.
inline KmeansResult kmeans_fit(const Matrix& points, std::size_t k, const KmeansConfig& cfg,
                               Rng& rng) {
  if (k == 0) throw std::invalid_argument("kmeans: k must be positive");
  if (k > points.rows()) throw std::invalid_argument("kmeans: k exceeds point count");
  KmeansResult best;
  bool have = false;
  for (std::size_t r = 0; r < cfg.restarts; ++r) {
    auto outcome = detail::lloyd(points, k, cfg, rng.split(r));
    if (!have || outcome.inertia < best.inertia) {
      have = true;
      best.labeling = Labeling(outcome.labels, static_cast<int>(k));
      best.centroids = outcome.centroids;
      best.inertia = outcome.inertia;
      best.iterations = outcome.iterations;
      best.objective_history = outcome.history;
      best.best_restart = r;
    }
  }
  return best;
}

inline Labeling kmeans(const Matrix& points, std::size_t k, const KmeansConfig& cfg, Rng& rng) {
  return kmeans_fit(points, k, cfg, rng).labeling;
}

}  // namespace missclust
