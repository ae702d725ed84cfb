// Masks a random low-rank matrix and recovers it by singular value
// thresholding, printing the recovery errors.

#include <iostream>

#include <missclust/missclust.hpp>

int main() {
  using namespace missclust;

  Rng rng(7);
  const Matrix m = random_low_rank(200, 60, 2, rng);
  const MaskedMatrix masked = remove_entries(m, 0.4, rng);

  const CompletionResult res = complete(masked);
  Matrix diff(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) diff(i, j) = m(i, j) - res.completed(i, j);

  std::cout << "masked 40% of a rank-2 200x60 matrix\n"
            << "converged: " << (res.converged ? "yes" : "no") << " after " << res.iterations
            << " iterations\n"
            << "relative Frobenius error: " << relative_frobenius(m, res.completed) << '\n'
            << "spectral error:           " << spectral_norm(diff) << '\n';
  return 0;
}
