#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "missclust/labeling.hpp"

namespace missclust {

namespace detail {

// Minimum-cost perfect assignment on a square cost matrix via the potentials
// method, O(k^3). Returns assignment[row] = column.
inline std::vector<int> min_cost_assignment(const std::vector<std::vector<double>>& cost) {
  const int n = static_cast<int>(cost.size());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      int j1 = 0;
      double delta = inf;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  std::vector<int> assignment(n, -1);
  for (int j = 1; j <= n; ++j)
    if (p[j] > 0) assignment[p[j] - 1] = j - 1;
  return assignment;
}

inline std::vector<std::vector<double>> confusion_counts(const Labeling& predicted,
                                                         const Labeling& truth, int k) {
  std::vector<std::vector<double>> c(k, std::vector<double>(k, 0.0));
  for (std::size_t i = 0; i < predicted.size(); ++i)
    c[predicted.labels[i]][truth.labels[i]] += 1.0;
  return c;
}

}  // namespace detail

// Best mapping of predicted labels onto truth labels: perm[p] = t maximizing
// total agreement. Exhaustive for k <= 8, assignment problem beyond.
inline std::vector<int> ccr_alignment(const Labeling& predicted, const Labeling& truth) {
  if (predicted.size() != truth.size())
    throw std::invalid_argument("ccr_alignment: labeling length mismatch");
  const int k = std::max(predicted.k, truth.k);
  const auto confusion = detail::confusion_counts(predicted, truth, k);
  if (k <= 8) {
    std::vector<int> perm(k), best(k);
    std::iota(perm.begin(), perm.end(), 0);
    best = perm;
    double best_agree = -1.0;
    do {
      double agree = 0.0;
      for (int c = 0; c < k; ++c) agree += confusion[c][perm[c]];
      if (agree > best_agree) {
        best_agree = agree;
        best = perm;
      }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
  }
  std::vector<std::vector<double>> cost(k, std::vector<double>(k));
  for (int p = 0; p < k; ++p)
    for (int t = 0; t < k; ++t) cost[p][t] = -confusion[p][t];
  return detail::min_cost_assignment(cost);
}

// Correct classification rate: agreement fraction under the best label
// permutation.
inline double ccr(const Labeling& predicted, const Labeling& truth) {
  if (predicted.size() != truth.size()) throw std::invalid_argument("ccr: labeling length mismatch");
  if (predicted.size() == 0) throw std::invalid_argument("ccr: empty labelings");
  const auto perm = ccr_alignment(predicted, truth);
  std::size_t agree = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i)
    if (perm[predicted.labels[i]] == truth.labels[i]) ++agree;
  return static_cast<double>(agree) / static_cast<double>(predicted.size());
}

struct CcrSummary {
  double mean = 0.0;
  double sd = 0.0;
  double min = 0.0;
  double median = 0.0;
  double max = 0.0;
  std::size_t n_trials = 0;
};

// Mean, sample (n-1) standard deviation, min, median, max. Median is the
// midpoint of the two central order statistics for even counts; a single value
// has sd 0.
inline CcrSummary summarize(const std::vector<double>& rates) {
  if (rates.empty()) throw std::invalid_argument("summarize: empty input");
  CcrSummary s;
  s.n_trials = rates.size();
  s.mean = std::accumulate(rates.begin(), rates.end(), 0.0) / static_cast<double>(rates.size());
  if (rates.size() > 1) {
    double ss = 0.0;
    for (double r : rates) ss += (r - s.mean) * (r - s.mean);
    s.sd = std::sqrt(ss / static_cast<double>(rates.size() - 1));
  }
  std::vector<double> sorted(rates);
  std::sort(sorted.begin(), sorted.end());
  s.min = sorted.front();
  s.max = sorted.back();
  const std::size_t n = sorted.size();
  s.median = (n % 2 == 1) ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
  return s;
}

}  // namespace missclust
