#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include <missclust/lpa.hpp>
#include <missclust/matrix.hpp>
#include <missclust/metrics.hpp>
#include <missclust/rng.hpp>
#include <missclust/simulators.hpp>

using namespace missclust;

namespace {

// Reference diagonal-Gaussian log density, written independently of the
// implementation under test.
double ref_log_density(const LpaModel& m, std::size_t c, const double* x, std::size_t d) {
  double lp = std::log(m.weights[c]);
  for (std::size_t j = 0; j < d; ++j) {
    const double var = m.variances(c, j);
    const double diff = x[j] - m.means(c, j);
    lp += -0.5 * std::log(2.0 * M_PI * var) - 0.5 * diff * diff / var;
  }
  return lp;
}

}  // namespace

TEST_CASE("single component fit recovers column moments", "[lpa]") {
  Matrix data = Matrix::from_rows({{1.0, 2.0}, {3.0, 6.0}, {5.0, 4.0}, {7.0, 8.0}});
  Rng rng(51);
  const LpaFitResult res = lpa_fit(data, 1, {}, rng);
  REQUIRE(res.model.weights[0] == Catch::Approx(1.0).margin(1e-12));

  for (std::size_t j = 0; j < 2; ++j) {
    double mean = 0.0;
    for (std::size_t i = 0; i < 4; ++i) mean += data(i, j);
    mean /= 4.0;
    double var = 0.0;
    for (std::size_t i = 0; i < 4; ++i) var += (data(i, j) - mean) * (data(i, j) - mean);
    var /= 4.0;
    REQUIRE(res.model.means(0, j) == Catch::Approx(mean).margin(1e-8));
    REQUIRE(res.model.variances(0, j) == Catch::Approx(var).margin(1e-8));
  }
}

TEST_CASE("two far components are located accurately", "[lpa]") {
  Rng data_rng(52);
  const Dataset ds = gen_two_gaussians({.a = 5.0, .n_total = 400}, data_rng);
  Rng rng(53);
  const LpaFitResult res = lpa_fit(ds.points, 2, {}, rng);
  REQUIRE(res.converged);

  // Identify components by their first coordinate.
  const std::size_t lo = res.model.means(0, 0) < res.model.means(1, 0) ? 0 : 1;
  const std::size_t hi = 1 - lo;
  for (std::size_t j = 0; j < 2; ++j) {
    REQUIRE(std::abs(res.model.means(lo, j) - 0.0) < 0.2);
    REQUIRE(std::abs(res.model.means(hi, j) - 5.0) < 0.2);
  }
}

TEST_CASE("assignment sends a component mean to that component", "[lpa]") {
  LpaModel model{.k = 2,
                 .weights = {0.5, 0.5},
                 .means = Matrix::from_rows({{0.0, 0.0}, {4.0, 4.0}}),
                 .variances = Matrix::from_rows({{1.0, 1.0}, {1.0, 1.0}})};
  Matrix query = Matrix::from_rows({{0.0, 0.0}, {4.0, 4.0}});
  const Labeling l = lpa_assign(model, query);
  REQUIRE(l.labels[0] == 0);
  REQUIRE(l.labels[1] == 1);
}

TEST_CASE("responsibilities match a direct density computation", "[lpa]") {
  LpaModel model{.k = 2,
                 .weights = {0.3, 0.7},
                 .means = Matrix::from_rows({{0.0, 1.0}, {2.0, -1.0}}),
                 .variances = Matrix::from_rows({{1.0, 0.5}, {2.0, 1.5}})};
  Matrix data =
      Matrix::from_rows({{0.0, 0.0}, {1.0, 1.0}, {2.0, -1.0}, {-1.5, 2.0}, {3.0, 0.5}});
  const Matrix resp = lpa_responsibilities(model, data);

  for (std::size_t i = 0; i < 5; ++i) {
    const double l0 = ref_log_density(model, 0, data.row(i), 2);
    const double l1 = ref_log_density(model, 1, data.row(i), 2);
    const double mx = std::max(l0, l1);
    const double z = std::exp(l0 - mx) + std::exp(l1 - mx);
    REQUIRE(resp(i, 0) == Catch::Approx(std::exp(l0 - mx) / z).margin(1e-12));
    REQUIRE(resp(i, 1) == Catch::Approx(std::exp(l1 - mx) / z).margin(1e-12));
  }
}

TEST_CASE("assignment is invariant to a common positive weight scale", "[lpa]") {
  Matrix means = Matrix::from_rows({{0.0}, {2.5}});
  Matrix vars = Matrix::from_rows({{1.0}, {1.0}});
  LpaModel scaled{.k = 2, .weights = {0.6, 1.4}, .means = means, .variances = vars};
  LpaModel normalized{.k = 2, .weights = {0.3, 0.7}, .means = means, .variances = vars};

  Rng rng(54);
  Matrix data(50, 1);
  for (std::size_t i = 0; i < 50; ++i) data(i, 0) = rng.normal() * 2.0 + 1.0;
  REQUIRE(lpa_assign(scaled, data) == lpa_assign(normalized, data));
}

TEST_CASE("responsibility rows sum to one", "[lpa]") {
  Rng data_rng(55);
  const Dataset ds = gen_two_gaussians({.a = 1.0, .n_total = 120}, data_rng);
  Rng rng(56);
  const LpaFitResult res = lpa_fit(ds.points, 2, {}, rng);
  const Matrix resp = lpa_responsibilities(res.model, ds.points);
  for (std::size_t i = 0; i < resp.rows(); ++i) {
    double s = 0.0;
    for (std::size_t c = 0; c < 2; ++c) {
      REQUIRE(resp(i, c) >= 0.0);
      s += resp(i, c);
    }
    REQUIRE(s == Catch::Approx(1.0).margin(1e-10));
  }
}

TEST_CASE("log-likelihood history is non-decreasing", "[lpa]") {
  Rng data_rng(57);
  const Dataset ds = gen_two_gaussians({.a = 1.5, .n_total = 150}, data_rng);
  Rng rng(58);
  const LpaFitResult res = lpa_fit(ds.points, 2, {}, rng);
  REQUIRE(res.loglik_history.size() >= 2);
  for (std::size_t i = 1; i < res.loglik_history.size(); ++i)
    REQUIRE(res.loglik_history[i] >= res.loglik_history[i - 1] - 1e-9);
  REQUIRE(res.loglik == res.loglik_history.back());
}

TEST_CASE("fit is bit-reproducible for a fixed seed", "[lpa]") {
  Rng data_rng(59);
  const Dataset ds = gen_two_gaussians({.a = 2.0, .n_total = 100}, data_rng);
  Rng r1(60), r2(60);
  const LpaFitResult a = lpa_fit(ds.points, 2, {}, r1);
  const LpaFitResult b = lpa_fit(ds.points, 2, {}, r2);
  REQUIRE(a.loglik == b.loglik);
  REQUIRE(a.best_restart == b.best_restart);
  REQUIRE(a.model.weights == b.model.weights);
  for (std::size_t c = 0; c < 2; ++c)
    for (std::size_t j = 0; j < 2; ++j) {
      REQUIRE(a.model.means(c, j) == b.model.means(c, j));
      REQUIRE(a.model.variances(c, j) == b.model.variances(c, j));
    }
}

TEST_CASE("swapping components swaps the assigned labels", "[lpa]") {
  LpaModel fwd{.k = 2,
               .weights = {0.4, 0.6},
               .means = Matrix::from_rows({{0.0, 0.0}, {3.0, 1.0}}),
               .variances = Matrix::from_rows({{1.0, 2.0}, {0.5, 1.5}})};
  LpaModel rev{.k = 2,
               .weights = {0.6, 0.4},
               .means = Matrix::from_rows({{3.0, 1.0}, {0.0, 0.0}}),
               .variances = Matrix::from_rows({{0.5, 1.5}, {1.0, 2.0}})};
  Rng rng(61);
  Matrix data(40, 2);
  for (std::size_t i = 0; i < 40; ++i) {
    data(i, 0) = rng.normal() * 1.5 + 1.5;
    data(i, 1) = rng.normal() + 0.5;
  }
  const Labeling a = lpa_assign(fwd, data);
  const Labeling b = lpa_assign(rev, data);
  for (std::size_t i = 0; i < 40; ++i) REQUIRE(a.labels[i] == 1 - b.labels[i]);
}

TEST_CASE("fit rejects invalid arguments", "[lpa]") {
  Matrix data = Matrix::from_rows({{0.0}, {1.0}});
  Rng rng(62);
  REQUIRE_THROWS_AS(lpa_fit(data, 0, {}, rng), std::invalid_argument);
  REQUIRE_THROWS_AS(lpa_fit(data, 3, {}, rng), std::invalid_argument);
  EmConfig bad;
  bad.restarts = 0;
  REQUIRE_THROWS_AS(lpa_fit(data, 1, bad, rng), std::invalid_argument);
}
