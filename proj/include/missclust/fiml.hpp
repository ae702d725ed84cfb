#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "missclust/eigen_map.hpp"
#include "missclust/kmeans.hpp"
#include "missclust/labeling.hpp"
#include "missclust/lpa.hpp"
#include "missclust/matrix.hpp"
#include "missclust/rng.hpp"

namespace missclust {

// Eigenvalue floor applied to covariance sub-blocks before inversion.
constexpr double pd_floor = 1e-8;

struct GaussianParams {
  std::vector<double> mu;
  Matrix sigma;  // d x d symmetric, eigenvalues >= pd_floor after flooring
};

namespace detail {

// Eigendecomposition of a symmetric covariance block with flooring. A block
// that is decisively non-PSD (eigenvalue below -1e-6) is rejected rather than
// silently repaired.
struct FlooredCov {
  Eigen::MatrixXd vectors;
  Eigen::VectorXd values;  // clamped to pd_floor
  double logdet;

  explicit FlooredCov(const Eigen::MatrixXd& cov) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
    if (es.info() != Eigen::Success)
      throw std::runtime_error("covariance eigendecomposition failed");
    values = es.eigenvalues();
    vectors = es.eigenvectors();
    logdet = 0.0;
    for (Eigen::Index i = 0; i < values.size(); ++i) {
      if (values(i) < -1e-6)
        throw std::invalid_argument("covariance block is not positive semidefinite");
      values(i) = std::max(values(i), pd_floor);
      logdet += std::log(values(i));
    }
  }

  Eigen::VectorXd solve(const Eigen::VectorXd& b) const {
    return vectors * (vectors.transpose() * b).cwiseQuotient(values);
  }

  Eigen::MatrixXd solve_matrix(const Eigen::MatrixXd& b) const {
    Eigen::MatrixXd t = vectors.transpose() * b;
    for (Eigen::Index i = 0; i < values.size(); ++i) t.row(i) /= values(i);
    return vectors * t;
  }
};

inline std::vector<std::size_t> observed_indices(std::span<const std::uint8_t> mask) {
  std::vector<std::size_t> idx;
  for (std::size_t j = 0; j < mask.size(); ++j)
    if (mask[j]) idx.push_back(j);
  return idx;
}

inline Eigen::MatrixXd submatrix(const Matrix& sigma, const std::vector<std::size_t>& rows,
                                 const std::vector<std::size_t>& cols) {
  Eigen::MatrixXd out(rows.size(), cols.size());
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < cols.size(); ++c)
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = sigma(rows[r], cols[c]);
  return out;
}

}  // namespace detail

// Observed-coordinate Gaussian log-density of one case:
// -(p/2) log(2 pi) - (1/2) log|Sigma_oo| - (1/2) (x_o - mu_o)' Sigma_oo^{-1} (x_o - mu_o).
inline double casewise_loglik(const GaussianParams& params, std::span<const double> values,
                              std::span<const std::uint8_t> mask) {
  const std::size_t d = params.mu.size();
  if (values.size() != d || mask.size() != d)
    throw std::invalid_argument("casewise_loglik: dimension mismatch");
  const auto obs = detail::observed_indices(mask);
  if (obs.empty()) throw std::invalid_argument("casewise_loglik: no observed coordinates");
  const auto p = static_cast<double>(obs.size());
  Eigen::VectorXd centered(static_cast<Eigen::Index>(obs.size()));
  for (std::size_t r = 0; r < obs.size(); ++r)
    centered(static_cast<Eigen::Index>(r)) = values[obs[r]] - params.mu[obs[r]];
  detail::FlooredCov cov(detail::submatrix(params.sigma, obs, obs));
  const double quad = centered.dot(cov.solve(centered));
  return -0.5 * p * detail::log_2pi - 0.5 * cov.logdet - 0.5 * quad;
}

// Sum of case-wise log-likelihoods over all rows.
inline double total_loglik(const GaussianParams& params, const MaskedMatrix& data) {
  const std::size_t n = data.rows(), d = data.cols();
  if (params.mu.size() != d) throw std::invalid_argument("total_loglik: dimension mismatch");
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    std::span<const double> row(data.values().row(i), d);
    std::span<const std::uint8_t> mask(data.mask().data() + i * d, d);
    total += casewise_loglik(params, row, mask);
  }
  return total;
}

// Conditional distribution of the missing coordinates given the observed ones.
// filled carries observed values verbatim and conditional means elsewhere;
// cond_cov is zero outside the missing-missing block.
struct ConditionalMoments {
  std::vector<double> filled;
  Matrix cond_cov;
};

inline ConditionalMoments conditional_moments(const GaussianParams& params,
                                              std::span<const double> values,
                                              std::span<const std::uint8_t> mask) {
  const std::size_t d = params.mu.size();
  if (values.size() != d || mask.size() != d)
    throw std::invalid_argument("conditional_moments: dimension mismatch");
  std::vector<std::size_t> obs, mis;
  for (std::size_t j = 0; j < d; ++j) (mask[j] ? obs : mis).push_back(j);

  ConditionalMoments out{.filled = std::vector<double>(values.begin(), values.end()),
                         .cond_cov = Matrix(d, d)};
  if (mis.empty()) return out;
  if (obs.empty()) {
    for (std::size_t j = 0; j < d; ++j) out.filled[j] = params.mu[j];
    out.cond_cov = params.sigma;
    return out;
  }

  detail::FlooredCov cov_oo(detail::submatrix(params.sigma, obs, obs));
  const Eigen::MatrixXd sigma_mo = detail::submatrix(params.sigma, mis, obs);
  Eigen::VectorXd centered(static_cast<Eigen::Index>(obs.size()));
  for (std::size_t r = 0; r < obs.size(); ++r)
    centered(static_cast<Eigen::Index>(r)) = values[obs[r]] - params.mu[obs[r]];

  const Eigen::VectorXd cond_mean = sigma_mo * cov_oo.solve(centered);
  for (std::size_t r = 0; r < mis.size(); ++r)
    out.filled[mis[r]] = params.mu[mis[r]] + cond_mean(static_cast<Eigen::Index>(r));

  const Eigen::MatrixXd sigma_mm = detail::submatrix(params.sigma, mis, mis);
  const Eigen::MatrixXd cc =
      sigma_mm - sigma_mo * cov_oo.solve_matrix(sigma_mo.transpose());
  for (std::size_t r = 0; r < mis.size(); ++r)
    for (std::size_t c = 0; c < mis.size(); ++c)
      out.cond_cov(mis[r], mis[c]) =
          cc(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
  return out;
}

struct FimlFitResult {
  GaussianParams params;
  double loglik = -std::numeric_limits<double>::infinity();
  std::vector<double> loglik_history;  // non-decreasing
  std::size_t iterations = 0;
  bool converged = false;
};

// Single-Gaussian FIML via EM: conditional first and second moments of the
// missing coordinates in the E-step, sample updates in the M-step. Estimates
// parameters only, never imputes into the data. Initialization is
// deterministic (observed column means and variances), so cfg.restarts is
// irrelevant here.
inline FimlFitResult fiml_fit(const MaskedMatrix& data, const EmConfig& cfg = {}) {
  const std::size_t n = data.rows(), d = data.cols();
  for (std::size_t j = 0; j < d; ++j) {
    std::size_t count = 0;
    for (std::size_t i = 0; i < n; ++i) count += data.observed(i, j) ? 1 : 0;
    if (count < 2)
      throw std::invalid_argument("fiml_fit: column " + std::to_string(j) +
                                  " has fewer than 2 observed entries");
  }

  FimlFitResult result;
  result.params.mu.assign(d, 0.0);
  result.params.sigma = Matrix(d, d);
  for (std::size_t j = 0; j < d; ++j) {
    double sum = 0.0, sum2 = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < n; ++i)
      if (data.observed(i, j)) {
        sum += data.values()(i, j);
        sum2 += data.values()(i, j) * data.values()(i, j);
        ++count;
      }
    const double mean = sum / static_cast<double>(count);
    result.params.mu[j] = mean;
    result.params.sigma(j, j) = std::max(sum2 / static_cast<double>(count) - mean * mean, pd_floor);
  }

  double prev = -std::numeric_limits<double>::infinity();
  while (result.iterations < cfg.max_iter) {
    ++result.iterations;
    const double ll = total_loglik(result.params, data);
    result.loglik_history.push_back(ll);
    if (std::isfinite(prev) && std::abs(ll - prev) <= cfg.loglik_tol * (1.0 + std::abs(ll))) {
      result.converged = true;
      break;
    }
    prev = ll;

    std::vector<double> mean_acc(d, 0.0);
    Matrix s2(d, d);
    for (std::size_t i = 0; i < n; ++i) {
      std::span<const double> row(data.values().row(i), d);
      std::span<const std::uint8_t> mask(data.mask().data() + i * d, d);
      const auto cm = conditional_moments(result.params, row, mask);
      for (std::size_t a = 0; a < d; ++a) {
        mean_acc[a] += cm.filled[a];
        for (std::size_t b = 0; b < d; ++b)
          s2(a, b) += cm.filled[a] * cm.filled[b] + cm.cond_cov(a, b);
      }
    }
    for (std::size_t a = 0; a < d; ++a) result.params.mu[a] = mean_acc[a] / static_cast<double>(n);
    for (std::size_t a = 0; a < d; ++a)
      for (std::size_t b = 0; b < d; ++b)
        result.params.sigma(a, b) =
            s2(a, b) / static_cast<double>(n) - result.params.mu[a] * result.params.mu[b];
    // Re-symmetrize and floor so the next E-step sees a valid covariance.
    Eigen::MatrixXd sym = detail::as_eigen(result.params.sigma);
    sym = 0.5 * (sym + sym.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
    Eigen::VectorXd vals = es.eigenvalues().cwiseMax(pd_floor);
    detail::as_eigen(result.params.sigma) =
        es.eigenvectors() * vals.asDiagonal() * es.eigenvectors().transpose();
  }
  result.loglik = result.loglik_history.back();
  return result;
}

struct FimlLpaResult {
  LpaModel model;
  Labeling labeling;
  double loglik = -std::numeric_limits<double>::infinity();
  std::vector<double> loglik_history;  // winning restart, non-decreasing
  std::size_t iterations = 0;
  bool converged = false;
  std::size_t best_restart = 0;
};

namespace detail {

// E-step over observed coordinates only: responsibilities proportional to
// weight times the observed-marginal density, which for a diagonal model is a
// product over the observed coordinates.
inline double fiml_lpa_estep(const MaskedMatrix& data, const LpaModel& model, Matrix& resp) {
  const std::size_t n = data.rows(), d = data.cols();
  const auto k = static_cast<std::size_t>(model.k);
  std::vector<double> log_w(k), log_v(k * d);
  for (std::size_t c = 0; c < k; ++c) {
    log_w[c] = model.weights[c] > 0.0 ? std::log(model.weights[c])
                                      : -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < d; ++j) log_v[c * d + j] = std::log(model.variances(c, j));
  }
  double loglik = 0.0;
  std::vector<double> lp(k);
  for (std::size_t i = 0; i < n; ++i) {
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < k; ++c) {
      double acc = log_w[c];
      for (std::size_t j = 0; j < d; ++j) {
        if (!data.observed(i, j)) continue;
        const double diff = data.values()(i, j) - model.means(c, j);
        acc -= 0.5 * (log_2pi + log_v[c * d + j] + diff * diff / model.variances(c, j));
      }
      lp[c] = acc;
      if (acc > mx) mx = acc;
    }
    double sum = 0.0;
    for (std::size_t c = 0; c < k; ++c) sum += std::exp(lp[c] - mx);
    const double lse = mx + std::log(sum);
    loglik += lse;
    for (std::size_t c = 0; c < k; ++c) resp(i, c) = std::exp(lp[c] - lse);
  }
  return loglik;
}

// M-step with missing cells integrated out. Under a diagonal model a missing
// coordinate contributes its current component mean to the mean update, and
// its current variance plus the squared mean shift to the variance update.
inline void fiml_lpa_mstep(const MaskedMatrix& data, const Matrix& resp, double variance_floor,
                           LpaModel& model) {
  const std::size_t n = data.rows(), d = data.cols();
  const auto k = static_cast<std::size_t>(model.k);
  for (std::size_t c = 0; c < k; ++c) {
    double mass = 0.0;
    for (std::size_t i = 0; i < n; ++i) mass += resp(i, c);
    model.weights[c] = mass / static_cast<double>(n);
    if (mass < 1e-300) continue;
    for (std::size_t j = 0; j < d; ++j) {
      const double old_mean = model.means(c, j);
      const double old_var = model.variances(c, j);
      double obs_sum = 0.0, mis_mass = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (data.observed(i, j))
          obs_sum += resp(i, c) * data.values()(i, j);
        else
          mis_mass += resp(i, c);
      }
      const double new_mean = (obs_sum + mis_mass * old_mean) / mass;
      double acc = mis_mass * (old_var + (old_mean - new_mean) * (old_mean - new_mean));
      for (std::size_t i = 0; i < n; ++i) {
        if (!data.observed(i, j)) continue;
        const double diff = data.values()(i, j) - new_mean;
        acc += resp(i, c) * diff * diff;
      }
      model.means(c, j) = new_mean;
      model.variances(c, j) = std::max(acc / mass, variance_floor);
    }
  }
}

// Column-mean imputation used only to seed k-means; the EM itself never sees
// imputed values.
inline Matrix impute_column_means(const MaskedMatrix& data) {
  const std::size_t n = data.rows(), d = data.cols();
  Matrix out = data.values();
  for (std::size_t j = 0; j < d; ++j) {
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < n; ++i)
      if (data.observed(i, j)) {
        sum += out(i, j);
        ++count;
      }
    const double mean = sum / static_cast<double>(count);
    for (std::size_t i = 0; i < n; ++i)
      if (!data.observed(i, j)) out(i, j) = mean;
  }
  return out;
}

}  // namespace detail

// Responsibilities of a diagonal mixture over incomplete rows; rows sum to 1.
inline Matrix fiml_lpa_responsibilities(const LpaModel& model, const MaskedMatrix& data) {
  if (model.means.cols() != data.cols())
    throw std::invalid_argument("fiml_lpa_responsibilities: dimension mismatch");
  Matrix resp(data.rows(), static_cast<std::size_t>(model.k));
  detail::fiml_lpa_estep(data, model, resp);
  return resp;
}

// Mixture EM on incomplete data: each case enters the E-step through its
// observed-coordinate marginal density and the M-step through conditional
// expectations, so nothing is ever imputed. Restart protocol matches lpa_fit.
inline FimlLpaResult fiml_lpa_fit(const MaskedMatrix& data, std::size_t k, const EmConfig& cfg,
                                  Rng& rng) {
  detail::validate_em_config(cfg);
  const std::size_t n = data.rows(), d = data.cols();
  if (k == 0 || k > n) throw std::invalid_argument("fiml_lpa_fit: k out of range");
  for (std::size_t i = 0; i < n; ++i) {
    bool any = false;
    for (std::size_t j = 0; j < d; ++j)
      if (data.observed(i, j)) {
        any = true;
        break;
      }
    if (!any)
      throw std::invalid_argument("fiml_lpa_fit: row " + std::to_string(i) +
                                  " has no observed entries");
  }

  const Matrix imputed = detail::impute_column_means(data);
  FimlLpaResult best;
  for (std::size_t r = 0; r < cfg.restarts; ++r) {
    LpaModel model = detail::lpa_init(imputed, k, cfg.variance_floor, rng.split(r));
    Matrix resp(n, k);
    std::vector<double> history;
    double prev = -std::numeric_limits<double>::infinity();
    bool converged = false;
    std::size_t it = 0;
    while (it < cfg.max_iter) {
      ++it;
      const double ll = detail::fiml_lpa_estep(data, model, resp);
      history.push_back(ll);
      if (std::isfinite(prev) && std::abs(ll - prev) <= cfg.loglik_tol * (1.0 + std::abs(ll))) {
        converged = true;
        break;
      }
      prev = ll;
      detail::fiml_lpa_mstep(data, resp, cfg.variance_floor, model);
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

  // Assignment at the winning parameters.
  Matrix resp(n, static_cast<std::size_t>(best.model.k));
  detail::fiml_lpa_estep(data, best.model, resp);
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t arg = 0;
    for (std::size_t c = 1; c < k; ++c)
      if (resp(i, c) > resp(i, arg)) arg = c;
    labels[i] = static_cast<int>(arg);
  }
  best.labeling = Labeling(std::move(labels), static_cast<int>(k));
  return best;
}

}  // namespace missclust
