// PCA summary of a feature matrix: eigenvalues of the 6x6 column
// covariance, computed with a cyclic Jacobi eigensolver.
#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "pmuevent/features.hpp"

namespace pmuevent {

// Sum with the addends sorted first, so the result does not depend on the
// order the values arrived in (row-permutation stability).
inline double stable_sum(std::vector<double>& terms) {
  std::sort(terms.begin(), terms.end());
  double s = 0.0;
  for (double t : terms) s += t;
  return s;
}

// Eigenvalues of a symmetric n x n matrix (row-major), unsorted.
// Cyclic Jacobi sweeps until the off-diagonal Frobenius norm drops below
// off_tol or rotations stop making progress.
inline std::vector<double> jacobi_eigenvalues(std::vector<double> a, std::size_t n,
                                              double off_tol = 1e-12,
                                              int max_sweeps = 100) {
  if (a.size() != n * n) throw std::invalid_argument("jacobi: matrix size mismatch");
  const auto off_norm = [&] {
    double s = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) s += 2.0 * a[p * n + q] * a[p * n + q];
    return std::sqrt(s);
  };
  for (int sweep = 0; sweep < max_sweeps && off_norm() >= off_tol; ++sweep) {
    bool rotated = false;
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a[p * n + q];
        if (apq == 0.0) continue;
        const double app = a[p * n + p];
        const double aqq = a[q * n + q];
        // Skip rotations that cannot move the diagonal at this precision.
        if (std::abs(apq) < 1e-300 ||
            std::abs(apq) <= 1e-18 * (std::abs(app) + std::abs(aqq))) {
          continue;
        }
        const double theta = (aqq - app) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a[k * n + p];
          const double akq = a[k * n + q];
          a[k * n + p] = c * akp - s * akq;
          a[k * n + q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a[p * n + k];
          const double aqk = a[q * n + k];
          a[p * n + k] = c * apk - s * aqk;
          a[q * n + k] = s * apk + c * aqk;
        }
        a[p * n + q] = 0.0;
        a[q * n + p] = 0.0;
        rotated = true;
      }
    }
    if (!rotated) break;
  }
  std::vector<double> eig(n);
  for (std::size_t i = 0; i < n; ++i) eig[i] = a[i * n + i];
  return eig;
}

// Column covariance of the feature matrix, rows as observations, divisor
// rows-1. Accumulation is permutation-stable (sorted sums).
inline std::vector<double> feature_covariance(const FeatureMatrix& m) {
  const std::size_t n = kFeatureCols;
  std::vector<double> cov(n * n, 0.0);
  if (m.rows < 2) return cov;
  std::vector<double> terms(m.rows);
  std::array<double, kFeatureCols> mean{};
  for (std::size_t c = 0; c < n; ++c) {
    for (std::size_t r = 0; r < m.rows; ++r) terms[r] = m.at(r, c);
    mean[c] = stable_sum(terms) / static_cast<double>(m.rows);
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      for (std::size_t r = 0; r < m.rows; ++r)
        terms[r] = (m.at(r, i) - mean[i]) * (m.at(r, j) - mean[j]);
      const double cij = stable_sum(terms) / static_cast<double>(m.rows - 1);
      cov[i * n + j] = cij;
      cov[j * n + i] = cij;
    }
  }
  return cov;
}

// Dominant eigenvalues of the feature-matrix covariance, descending,
// truncated to k. Small negative values from roundoff are clamped to 0.
struct PcaSummary {
  std::vector<double> eigenvalues;
};

inline PcaSummary pca_eigenvalues(const FeatureMatrix& m, int k = 6) {
  if (k < 1 || k > static_cast<int>(kFeatureCols))
    throw std::invalid_argument("pca_eigenvalues: k must be in [1, 6]");
  std::vector<double> eig = jacobi_eigenvalues(feature_covariance(m), kFeatureCols);
  std::sort(eig.begin(), eig.end(), std::greater<>());
  eig.resize(static_cast<std::size_t>(k));
  for (double& v : eig) {
    if (v < 0.0) {
      if (v < -1e-9) throw std::domain_error("pca: covariance eigenvalue below -1e-9");
      v = 0.0;
    }
  }
  return PcaSummary{std::move(eig)};
}

}  // namespace pmuevent
