#include <catch2/catch_amalgamated.hpp>

#include <numeric>

#include "pmuevent/pca.hpp"
#include "pmuevent/rng.hpp"
#include "support/oracles.hpp"

using namespace pmuevent;

namespace {

FeatureMatrix random_matrix(std::size_t rows, std::uint64_t seed) {
  Rng rng(seed);
  FeatureMatrix m;
  m.rows = rows;
  m.data.resize(rows * kFeatureCols);
  for (auto& x : m.data) x = rng.normal();
  return m;
}

double covariance_trace(const FeatureMatrix& m) {
  const auto cov = feature_covariance(m);
  double tr = 0.0;
  for (std::size_t i = 0; i < kFeatureCols; ++i) tr += cov[i * kFeatureCols + i];
  return tr;
}

}  // namespace

TEST_CASE("jacobi recovers a known 2x2 spectrum") {
  const std::vector<double> a = {2.0, 1.0, 1.0, 2.0};
  auto eig = jacobi_eigenvalues(a, 2);
  std::sort(eig.begin(), eig.end());
  CHECK(eig[0] == Catch::Approx(1.0).margin(1e-12));
  CHECK(eig[1] == Catch::Approx(3.0).margin(1e-12));
}

TEST_CASE("identical rows give an all-zero spectrum") {
  FeatureMatrix m;
  m.rows = 30;
  m.data.resize(30 * kFeatureCols);
  for (std::size_t r = 0; r < m.rows; ++r)
    for (std::size_t c = 0; c < kFeatureCols; ++c) m.at(r, c) = 3.25 - 0.5 * c;
  for (double v : pca_eigenvalues(m, 6).eigenvalues) CHECK(v == 0.0);
}

TEST_CASE("diagonal covariance by construction gives its diagonal as spectrum") {
  // four rows, columns 0 and 1 orthogonal sign patterns, rest constant:
  // covariance = diag(2, 1, 0, 0, 0, 0)
  const double a = std::sqrt(1.5), b = std::sqrt(0.75);
  FeatureMatrix m;
  m.rows = 4;
  m.data.assign(4 * kFeatureCols, 0.0);
  const double c0[] = {a, a, -a, -a};
  const double c1[] = {b, -b, b, -b};
  for (std::size_t r = 0; r < 4; ++r) {
    m.at(r, 0) = c0[r];
    m.at(r, 1) = c1[r];
    m.at(r, 2) = 7.0;  // constant columns contribute nothing
  }
  const auto eig = pca_eigenvalues(m, 6).eigenvalues;
  REQUIRE(eig.size() == 6);
  CHECK(eig[0] == Catch::Approx(2.0).margin(1e-12));
  CHECK(eig[1] == Catch::Approx(1.0).margin(1e-12));
  for (std::size_t i = 2; i < 6; ++i) CHECK(eig[i] == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("spectrum is descending, clamped, and truncates to k") {
  const FeatureMatrix m = random_matrix(59, 4);
  const auto full = pca_eigenvalues(m, 6).eigenvalues;
  REQUIRE(full.size() == 6);
  for (std::size_t i = 1; i < full.size(); ++i) CHECK(full[i] <= full[i - 1]);
  for (double v : full) CHECK(v >= 0.0);
  const auto top2 = pca_eigenvalues(m, 2).eigenvalues;
  REQUIRE(top2.size() == 2);
  CHECK(top2[0] == full[0]);
  CHECK(top2[1] == full[1]);
  CHECK_THROWS_AS(pca_eigenvalues(m, 0), std::invalid_argument);
  CHECK_THROWS_AS(pca_eigenvalues(m, 7), std::invalid_argument);
}

TEST_CASE("eigenvalues match the root-bracketing oracle and conserve trace") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const FeatureMatrix m = random_matrix(59, seed);
    auto eig = pca_eigenvalues(m, 6).eigenvalues;  // descending
    auto ref = oracles::bracketed_eigenvalues(feature_covariance(m), kFeatureCols);
    std::sort(ref.begin(), ref.end(), std::greater<>());
    for (std::size_t i = 0; i < 6; ++i)
      CHECK(eig[i] == Catch::Approx(std::max(ref[i], 0.0)).margin(1e-8));
    const double sum = std::accumulate(eig.begin(), eig.end(), 0.0);
    CHECK(sum == Catch::Approx(covariance_trace(m)).margin(1e-9));
  }
}

TEST_CASE("row permutation leaves the spectrum bit-identical") {
  const FeatureMatrix m = random_matrix(59, 77);
  FeatureMatrix shuffled = m;
  std::vector<std::size_t> order(m.rows);
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(123);
  shuffle(order, rng);
  for (std::size_t r = 0; r < m.rows; ++r)
    for (std::size_t c = 0; c < kFeatureCols; ++c)
      shuffled.at(r, c) = m.at(order[r], c);

  const auto e1 = pca_eigenvalues(m, 6).eigenvalues;
  const auto e2 = pca_eigenvalues(shuffled, 6).eigenvalues;
  for (std::size_t i = 0; i < 6; ++i) CHECK(e1[i] == e2[i]);
}

TEST_CASE("adding a constant to one column barely moves the spectrum") {
  const FeatureMatrix m = random_matrix(59, 31);
  FeatureMatrix shifted = m;
  for (std::size_t r = 0; r < m.rows; ++r) shifted.at(r, 4) += 1000.0;
  const auto e1 = pca_eigenvalues(m, 6).eigenvalues;
  const auto e2 = pca_eigenvalues(shifted, 6).eigenvalues;
  for (std::size_t i = 0; i < 6; ++i) CHECK(e1[i] == Catch::Approx(e2[i]).margin(1e-9));
}
