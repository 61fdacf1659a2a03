// Feature matrix construction from a phasor window, plus the pooled
// normalization and row-stacking used by the autoencoder path.
//
// Each row describes one sample-to-sample transition, in the fixed column
// order [dv_mag, dv_ang, i_mag, i_ang, di_mag, di_ang]; level columns take
// the later sample of the pair, difference columns are later minus earlier,
// with angle differences wrapped into (-180, 180].
#pragma once

#include <array>
#include <cmath>
#include <filesystem>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "pmuevent/dataset_io.hpp"
#include "pmuevent/phasor.hpp"

namespace pmuevent {

inline constexpr std::size_t kFeatureCols = 6;

// Column headers for the debug CSV export (UTF-8).
inline constexpr std::array<std::string_view, kFeatureCols> kFeatureNames = {
    "Δv_mag", "Δv_ang", "i_mag", "i_ang", "Δi_mag", "Δi_ang"};

struct FeatureMatrix {
  std::size_t rows = 0;
  std::vector<double> data;  // row-major, rows x 6

  double& at(std::size_t r, std::size_t c) { return data[r * kFeatureCols + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * kFeatureCols + c]; }
};

inline FeatureMatrix build_feature_matrix(const EventRecord& record) {
  const auto& s = record.samples;
  if (s.size() < 2)
    throw std::invalid_argument("feature matrix needs at least 2 samples");
  FeatureMatrix m;
  m.rows = s.size() - 1;
  m.data.resize(m.rows * kFeatureCols);
  for (std::size_t k = 0; k < m.rows; ++k) {
    m.at(k, 0) = s[k + 1].v_mag - s[k].v_mag;
    m.at(k, 1) = wrap_angle_deg(s[k + 1].v_ang - s[k].v_ang);
    m.at(k, 2) = s[k + 1].i_mag;
    m.at(k, 3) = s[k + 1].i_ang;
    m.at(k, 4) = s[k + 1].i_mag - s[k].i_mag;
    m.at(k, 5) = wrap_angle_deg(s[k + 1].i_ang - s[k].i_ang);
  }
  return m;
}

// Per-column mean/std pooled over all rows of all training matrices.
struct NormStats {
  std::array<double, kFeatureCols> mean{};
  std::array<double, kFeatureCols> std{};
};

inline constexpr double kStdFloor = 1e-9;

inline NormStats fit_norm_stats(const std::vector<FeatureMatrix>& train) {
  if (train.empty()) throw std::invalid_argument("fit_norm_stats needs a nonempty training set");
  // Welford accumulation per column across every row of every matrix.
  std::array<double, kFeatureCols> mean{}, m2{};
  std::size_t n = 0;
  for (const auto& m : train) {
    for (std::size_t r = 0; r < m.rows; ++r) {
      ++n;
      for (std::size_t c = 0; c < kFeatureCols; ++c) {
        const double x = m.at(r, c);
        const double d = x - mean[c];
        mean[c] += d / static_cast<double>(n);
        m2[c] += d * (x - mean[c]);
      }
    }
  }
  if (n == 0) throw std::invalid_argument("fit_norm_stats saw no feature rows");
  NormStats st;
  st.mean = mean;
  for (std::size_t c = 0; c < kFeatureCols; ++c) {
    const double var = n > 1 ? m2[c] / static_cast<double>(n - 1) : 0.0;
    st.std[c] = std::max(std::sqrt(std::max(var, 0.0)), kStdFloor);
  }
  return st;
}

// Z-scores every entry by its column stats, then stacks rows in order:
// entry (r, c) lands at index 6*r + c.
inline std::vector<double> normalize_and_flatten(const FeatureMatrix& m, const NormStats& s) {
  std::vector<double> v(m.rows * kFeatureCols);
  for (std::size_t r = 0; r < m.rows; ++r)
    for (std::size_t c = 0; c < kFeatureCols; ++c)
      v[r * kFeatureCols + c] = (m.at(r, c) - s.mean[c]) / s.std[c];
  return v;
}

inline std::vector<double> flatten(const FeatureMatrix& m) {
  return m.data;
}

inline FeatureMatrix unflatten(const std::vector<double>& v) {
  if (v.size() % kFeatureCols != 0)
    throw std::invalid_argument("flattened feature vector length must be a multiple of 6");
  FeatureMatrix m;
  m.rows = v.size() / kFeatureCols;
  m.data = v;
  return m;
}

inline std::string feature_matrix_csv(const FeatureMatrix& m) {
  std::ostringstream out;
  for (std::size_t c = 0; c < kFeatureCols; ++c) {
    if (c) out << ',';
    out << kFeatureNames[c];
  }
  out << '\n';
  out.precision(17);
  for (std::size_t r = 0; r < m.rows; ++r) {
    for (std::size_t c = 0; c < kFeatureCols; ++c) {
      if (c) out << ',';
      out << m.at(r, c);
    }
    out << '\n';
  }
  return out.str();
}

inline void write_feature_csv(const FeatureMatrix& m, const std::filesystem::path& path) {
  atomic_write_file(path, feature_matrix_csv(m));
}

}  // namespace pmuevent
