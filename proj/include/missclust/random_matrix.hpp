#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "missclust/matrix.hpp"
#include "missclust/rng.hpp"

namespace missclust {

// Masks exactly round(fraction * n * d) entries chosen uniformly without
// replacement. A draw that leaves some column fully unobserved is rejected and
// redrawn, up to 100 times.
inline MaskedMatrix remove_entries(const Matrix& m, double fraction, Rng& rng) {
  if (!(fraction > 0.0 && fraction < 1.0))
    throw std::invalid_argument("remove_entries: fraction must be in (0,1)");
  const std::size_t n = m.rows(), d = m.cols(), total = n * d;
  const auto n_mask = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(total)));
  if (total - n_mask < d)
    throw std::invalid_argument("remove_entries: too few observed entries to cover every column");

  std::vector<std::uint32_t> idx(total);
  for (int attempt = 0; attempt < 100; ++attempt) {
    for (std::size_t i = 0; i < total; ++i) idx[i] = static_cast<std::uint32_t>(i);
    // Partial Fisher-Yates: the first n_mask slots become the masked set.
    for (std::size_t i = 0; i < n_mask; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng.uniform_below(total - i));
      std::swap(idx[i], idx[j]);
    }
    std::vector<std::uint8_t> mask(total, 1);
    std::vector<std::size_t> col_obs(d, n);
    for (std::size_t i = 0; i < n_mask; ++i) {
      mask[idx[i]] = 0;
      --col_obs[idx[i] % d];
    }
    bool ok = true;
    for (std::size_t j = 0; j < d; ++j)
      if (col_obs[j] == 0) {
        ok = false;
        break;
      }
    if (ok) return MaskedMatrix(m, std::move(mask));
  }
  throw std::runtime_error("remove_entries: could not cover every column after 100 attempts");
}

// A * B^T with i.i.d. standard normal factors; rank equals `rank` almost surely.
inline Matrix random_low_rank(std::size_t n, std::size_t d, std::size_t rank, Rng& rng) {
  if (rank == 0 || rank > std::min(n, d))
    throw std::invalid_argument("random_low_rank: rank out of range");
  Matrix a(n, rank), b(d, rank);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t r = 0; r < rank; ++r) a(i, r) = rng.normal();
  for (std::size_t j = 0; j < d; ++j)
    for (std::size_t r = 0; r < rank; ++r) b(j, r) = rng.normal();
  Matrix out(n, d);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) {
      double s = 0.0;
      for (std::size_t r = 0; r < rank; ++r) s += a(i, r) * b(j, r);
      out(i, j) = s;
    }
  return out;
}

}  // namespace missclust
