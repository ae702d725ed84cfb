#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

#include "missclust/kmeans.hpp"
#include "missclust/labeling.hpp"
#include "missclust/matrix.hpp"
#include "missclust/rng.hpp"

namespace missclust {

// Latent profile model: k-component Gaussian mixture with diagonal
// covariances (local independence).
struct LpaModel {
  int k = 0;
  std::vector<double> weights;  // sum to 1
  Matrix means;                 // k x d
  Matrix variances;             // k x d, every entry >= variance_floor
};

struct EmConfig {
  std::size_t max_iter = 500;
  double loglik_tol = 1e-7;  // relative change threshold
  std::size_t restarts = 10;
  double variance_floor = 1e-6;
};

struct LpaFitResult {
  LpaModel model;
  double loglik = -std::numeric_limits<double>::infinity();
  std::vector<double> loglik_history;  // winning restart, non-decreasing
  std::size_t iterations = 0;
  bool converged = false;
  std::size_t best_restart = 0;
};

namespace detail {

constexpr double log_2pi = 1.8378770664093454835606594728112353;

inline void validate_em_config(const EmConfig& cfg) {
  if (cfg.max_iter == 0 || cfg.restarts == 0 || !(cfg.loglik_tol > 0.0) ||
      !(cfg.variance_floor > 0.0))
    throw std::invalid_argument("EmConfig: all fields must be positive");
}

// E-step in log space. Fills resp (n x k) with posterior responsibilities and
// returns the observed-data log-likelihood.
inline double lpa_estep(const Matrix& data, const LpaModel& model, Matrix& resp) {
  const std::size_t n = data.rows(), d = data.cols();
  const auto k = static_cast<std::size_t>(model.k);
  std::vector<double> log_const(k);
  for (std::size_t c = 0; c < k; ++c) {
    double lc = model.weights[c] > 0.0 ? std::log(model.weights[c])
                                       : -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < d; ++j) lc -= 0.5 * (log_2pi + std::log(model.variances(c, j)));
    log_const[c] = lc;
  }
  double loglik = 0.0;
  std::vector<double> lp(k);
  for (std::size_t i = 0; i < n; ++i) {
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < k; ++c) {
      double q = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        const double diff = data(i, j) - model.means(c, j);
        q += diff * diff / model.variances(c, j);
      }
      lp[c] = log_const[c] - 0.5 * q;
      if (lp[c] > mx) mx = lp[c];
    }
    double sum = 0.0;
    for (std::size_t c = 0; c < k; ++c) sum += std::exp(lp[c] - mx);
    const double lse = mx + std::log(sum);
    loglik += lse;
    for (std::size_t c = 0; c < k; ++c) resp(i, c) = std::exp(lp[c] - lse);
  }
  return loglik;
}

// M-step: responsibility-weighted weights, means, and diagonal variances.
// A component with vanishing responsibility mass keeps its parameters.
inline void lpa_mstep(const Matrix& data, const Matrix& resp, double variance_floor,
                      LpaModel& model) {
  const std::size_t n = data.rows(), d = data.cols();
  const auto k = static_cast<std::size_t>(model.k);
  for (std::size_t c = 0; c < k; ++c) {
    double mass = 0.0;
    for (std::size_t i = 0; i < n; ++i) mass += resp(i, c);
    model.weights[c] = mass / static_cast<double>(n);
    if (mass < 1e-300) continue;
    for (std::size_t j = 0; j < d; ++j) {
      double m = 0.0;
      for (std::size_t i = 0; i < n; ++i) m += resp(i, c) * data(i, j);
      m /= mass;
      double v = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double diff = data(i, j) - m;
        v += resp(i, c) * diff * diff;
      }
      model.means(c, j) = m;
      model.variances(c, j) = std::max(v / mass, variance_floor);
    }
  }
}

// Hard responsibilities from a k-means labeling; the standard restart
// initializer for EM.
inline LpaModel lpa_init(const Matrix& data, std::size_t k, double variance_floor, Rng rng) {
  KmeansConfig kcfg;
  kcfg.restarts = 1;
  kcfg.max_iter = 100;
  const Labeling seed_labels = kmeans(data, k, kcfg, rng);
  const std::size_t n = data.rows();
  Matrix resp(n, k);
  for (std::size_t i = 0; i < n; ++i) resp(i, static_cast<std::size_t>(seed_labels.labels[i])) = 1.0;
  LpaModel model{.k = static_cast<int>(k),
                 .weights = std::vector<double>(k, 0.0),
                 .means = Matrix(k, data.cols()),
                 .variances = Matrix(k, data.cols(), 1.0)};
  lpa_mstep(data, resp, variance_floor, model);
  return model;
}

}  // namespace detail

// EM with k-means initialized restarts; the restart with the highest final
// log-likelihood wins, earlier index on ties. Log-likelihood is non-decreasing
// within each restart.
inline LpaFitResult lpa_fit(const Matrix& data, std::size_t k, const EmConfig& cfg, Rng& rng) {
  detail::validate_em_config(cfg);
  const std::size_t n = data.rows();
  if (k == 0 || k > n) throw std::invalid_argument("lpa_fit: k out of range");

  LpaFitResult best;
  for (std::size_t r = 0; r < cfg.restarts; ++r) {
    LpaModel model = detail::lpa_init(data, k, cfg.variance_floor, rng.split(r));
    Matrix resp(n, k);
    std::vector<double> history;
    double prev = -std::numeric_limits<double>::infinity();
    bool converged = false;
    std::size_t it = 0;
    while (it < cfg.max_iter) {
      ++it;
      const double ll = detail::lpa_estep(data, model, resp);
      history.push_back(ll);
      if (std::isfinite(prev) && std::abs(ll - prev) <= cfg.loglik_tol * (1.0 + std::abs(ll))) {
        converged = true;
        break;
      }
      prev = ll;
      detail::lpa_mstep(data, resp, cfg.variance_floor, model);
    }
    const double final_ll = history.back();
    if (final_ll > best.loglik) {
      best.model = std::move(model);
      best.loglik = final_ll;
      best.loglik_history = std::move(history);
      best.iterations = it;
      best.converged = converged;
      best.best_restart = r;
    }
  }
  return best;
}

// Posterior responsibilities; rows sum to 1.
inline Matrix lpa_responsibilities(const LpaModel& model, const Matrix& data) {
  if (model.means.cols() != data.cols())
    throw std::invalid_argument("lpa_responsibilities: dimension mismatch");
  Matrix resp(data.rows(), static_cast<std::size_t>(model.k));
  detail::lpa_estep(data, model, resp);
  return resp;
}

// Maximum-posterior assignment, ties to the lowest class index.
inline Labeling lpa_assign(const LpaModel& model, const Matrix& data) {
  const Matrix resp = lpa_responsibilities(model, data);
  const std::size_t n = data.rows();
  const auto k = static_cast<std::size_t>(model.k);
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t arg = 0;
    for (std::size_t c = 1; c < k; ++c)
      if (resp(i, c) > resp(i, arg)) arg = c;
    labels[i] = static_cast<int>(arg);
  }
  return Labeling(std::move(labels), model.k);
}

}  // namespace missclust
