// Soft-margin binary SVM with a Gaussian kernel, trained by sequential
// minimal optimization (pairwise coordinate ascent on the dual with an
// error cache), plus the one-against-all multi-class wrapper over PCA
// eigenvalue vectors.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "pmuevent/dataset_io.hpp"
#include "pmuevent/pca.hpp"
#include "pmuevent/phasor.hpp"
#include "pmuevent/rng.hpp"

namespace pmuevent {

struct SvmHyperParams {
  double c = 10.0;       // box constraint
  double sigma = 1.0;    // Gaussian kernel width (after standardization)
  double tol = 1e-3;     // KKT tolerance
  int max_passes = 200;  // SMO sweep limit
};

inline void validate_hyper(const SvmHyperParams& h) {
  if (!(h.c > 0.0) || !(h.sigma > 0.0) || !(h.tol > 0.0) || h.max_passes < 1)
    throw std::invalid_argument("svm hyperparameters must be positive");
}

inline double gaussian_kernel(const std::vector<double>& a, const std::vector<double>& b,
                              double sigma) {
  double d2 = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    d2 += d * d;
  }
  return std::exp(-d2 / (2.0 * sigma * sigma));
}

struct BinarySvmModel {
  std::vector<std::vector<double>> support_vectors;
  std::vector<double> alphas;       // in (0, c]
  std::vector<double> labels;      // +-1, aligned with support_vectors
  std::vector<std::size_t> sv_indices;  // positions in the training set
  double bias = 0.0;
  double sigma = 1.0;
  bool converged = true;
};

inline double svm_decision(const BinarySvmModel& m, const std::vector<double>& x) {
  double f = m.bias;
  for (std::size_t i = 0; i < m.support_vectors.size(); ++i)
    f += m.alphas[i] * m.labels[i] * gaussian_kernel(m.support_vectors[i], x, m.sigma);
  return f;
}

// Optional training observer: dual objective after every accepted pair
// update (used by the monotonicity property tests; costs O(n^2) per step).
struct SmoTrace {
  std::vector<double> dual_objective;
};

namespace detail {

class SmoSolver {
 public:
  SmoSolver(const std::vector<std::vector<double>>& x, const std::vector<int>& y,
            const SvmHyperParams& h, SmoTrace* trace)
      : x_(x), y_(y), h_(h), trace_(trace), n_(x.size()) {
    kernel_.resize(n_ * n_);
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = i; j < n_; ++j)
        kernel_[i * n_ + j] = kernel_[j * n_ + i] =
            gaussian_kernel(x_[i], x_[j], h_.sigma);
    alpha_.assign(n_, 0.0);
    errors_.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) errors_[i] = -y_[i];  // f == 0 initially
  }

  BinarySvmModel solve() {
    bool examine_all = true;
    int passes = 0;
    bool converged = false;
    while (true) {
      if (passes++ >= h_.max_passes) break;
      std::size_t changed = 0;
      for (std::size_t i = 0; i < n_; ++i) {
        if (examine_all || (alpha_[i] > 0.0 && alpha_[i] < h_.c)) changed += examine(i);
      }
      if (examine_all) {
        if (changed == 0) {
          converged = true;
          break;
        }
        examine_all = false;
      } else if (changed == 0) {
        examine_all = true;
      }
    }
    BinarySvmModel m;
    m.sigma = h_.sigma;
    m.bias = bias_;
    m.converged = converged;
    for (std::size_t i = 0; i < n_; ++i) {
      if (alpha_[i] > 0.0) {
        m.support_vectors.push_back(x_[i]);
        m.alphas.push_back(alpha_[i]);
        m.labels.push_back(static_cast<double>(y_[i]));
        m.sv_indices.push_back(i);
      }
    }
    return m;
  }

  double dual_objective() const {
    double lin = 0.0;
    for (std::size_t i = 0; i < n_; ++i) lin += alpha_[i];
    double quad = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
      if (alpha_[i] == 0.0) continue;
      for (std::size_t j = 0; j < n_; ++j) {
        if (alpha_[j] == 0.0) continue;
        quad += alpha_[i] * alpha_[j] * y_[i] * y_[j] * kernel_[i * n_ + j];
      }
    }
    return lin - 0.5 * quad;
  }

 private:
  static constexpr double kStepEps = 1e-8;

  bool examine(std::size_t i2) {
    const double y2 = y_[i2];
    const double a2 = alpha_[i2];
    const double e2 = errors_[i2];
    const double r2 = e2 * y2;
    const bool violates = (r2 < -h_.tol && a2 < h_.c) || (r2 > h_.tol && a2 > 0.0);
    if (!violates) return false;

    // Second-choice heuristic: largest |E1 - E2| among non-bound points.
    std::size_t best = n_;
    double best_gap = -1.0;
    for (std::size_t i = 0; i < n_; ++i) {
      if (i == i2 || alpha_[i] <= 0.0 || alpha_[i] >= h_.c) continue;
      const double gap = std::abs(errors_[i] - e2);
      if (gap > best_gap) {
        best_gap = gap;
        best = i;
      }
    }
    if (best < n_ && take_step(best, i2)) return true;

    // Fall back to scanning non-bound points, then everything, from a
    // rotating start so no index is systematically favored.
    const std::size_t start = rotation_++ % n_;
    for (std::size_t k = 0; k < n_; ++k) {
      const std::size_t i1 = (start + k) % n_;
      if (i1 == i2 || alpha_[i1] <= 0.0 || alpha_[i1] >= h_.c) continue;
      if (take_step(i1, i2)) return true;
    }
    for (std::size_t k = 0; k < n_; ++k) {
      const std::size_t i1 = (start + k) % n_;
      if (i1 == i2) continue;
      if (take_step(i1, i2)) return true;
    }
    return false;
  }

  bool take_step(std::size_t i1, std::size_t i2) {
    if (i1 == i2) return false;
    const double a1 = alpha_[i1], a2 = alpha_[i2];
    const double y1 = y_[i1], y2 = y_[i2];
    const double e1 = errors_[i1], e2 = errors_[i2];
    const double s = y1 * y2;
    double lo, hi;
    if (y1 != y2) {
      lo = std::max(0.0, a2 - a1);
      hi = std::min(h_.c, h_.c + a2 - a1);
    } else {
      lo = std::max(0.0, a1 + a2 - h_.c);
      hi = std::min(h_.c, a1 + a2);
    }
    if (lo >= hi) return false;

    const double k11 = kernel_[i1 * n_ + i1];
    const double k12 = kernel_[i1 * n_ + i2];
    const double k22 = kernel_[i2 * n_ + i2];
    const double eta = k11 + k22 - 2.0 * k12;
    double a2_new;
    if (eta > 1e-12) {
      a2_new = std::clamp(a2 + y2 * (e1 - e2) / eta, lo, hi);
    } else {
      // Degenerate direction (duplicate points): the objective is linear
      // along the constraint line, so move to whichever end improves it.
      const double slope = y2 * (e1 - e2);
      if (std::abs(slope) < kStepEps) return false;
      a2_new = slope > 0.0 ? hi : lo;
    }
    // snap to the exact bound so no dust alphas accumulate there
    if (a2_new < kStepEps)
      a2_new = 0.0;
    else if (a2_new > h_.c - kStepEps)
      a2_new = h_.c;
    if (std::abs(a2_new - a2) < kStepEps * (a2_new + a2 + kStepEps)) return false;
    // accept only steps that actually raise the dual objective; clipped
    // steps on near-duplicate points can otherwise cycle with large
    // alpha moves and no progress
    const double delta = a2_new - a2;
    const double gain = delta * y2 * (e1 - e2) - 0.5 * eta * delta * delta;
    if (gain <= 1e-12) return false;
    const double a1_new = a1 + s * (a2 - a2_new);

    const double d1 = y1 * (a1_new - a1);
    const double d2 = y2 * (a2_new - a2);
    const double b1 = bias_ - errors_[i1] - d1 * k11 - d2 * k12;
    const double b2 = bias_ - errors_[i2] - d1 * k12 - d2 * k22;
    double bias_new;
    if (a1_new > 0.0 && a1_new < h_.c)
      bias_new = b1;
    else if (a2_new > 0.0 && a2_new < h_.c)
      bias_new = b2;
    else
      bias_new = 0.5 * (b1 + b2);

    for (std::size_t i = 0; i < n_; ++i)
      errors_[i] += d1 * kernel_[i1 * n_ + i] + d2 * kernel_[i2 * n_ + i] +
                    (bias_new - bias_);
    alpha_[i1] = a1_new;
    alpha_[i2] = a2_new;
    bias_ = bias_new;
    if (trace_) trace_->dual_objective.push_back(dual_objective());
    return true;
  }

  const std::vector<std::vector<double>>& x_;
  const std::vector<int>& y_;
  SvmHyperParams h_;
  SmoTrace* trace_;
  std::size_t n_;
  std::vector<double> kernel_;
  std::vector<double> alpha_;
  std::vector<double> errors_;  // E_i = f(x_i) - y_i, kept for every point
  double bias_ = 0.0;
  std::size_t rotation_ = 0;
};

}  // namespace detail

// Trains a binary soft-margin SVM. Labels must be +-1 with at least one
// example of each. If the sweep limit is hit first, the best iterate is
// returned with converged = false.
inline BinarySvmModel smo_train(const std::vector<std::vector<double>>& x,
                                const std::vector<int>& y, const SvmHyperParams& h,
                                SmoTrace* trace = nullptr) {
  validate_hyper(h);
  if (x.size() != y.size() || x.empty())
    throw std::invalid_argument("smo_train: inputs empty or mismatched");
  bool pos = false, neg = false;
  for (int yi : y) {
    if (yi == 1)
      pos = true;
    else if (yi == -1)
      neg = true;
    else
      throw std::invalid_argument("smo_train: labels must be +-1");
  }
  if (!pos || !neg)
    throw std::invalid_argument("smo_train: need at least one example of each label");
  return detail::SmoSolver(x, y, h, trace).solve();
}

// Largest KKT violation over a labeled set, using the trained model's
// decision function; alphas for points outside the support set are zero
// and alphas within 1e-8 of a box bound count as sitting on it.
inline double max_kkt_violation(const BinarySvmModel& m,
                                const std::vector<std::vector<double>>& x,
                                const std::vector<int>& y, double c) {
  constexpr double kBoundEps = 1e-8;
  std::vector<double> alpha(x.size(), 0.0);
  for (std::size_t k = 0; k < m.sv_indices.size(); ++k) alpha[m.sv_indices[k]] = m.alphas[k];
  double worst = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double margin = y[i] * svm_decision(m, x[i]);
    double v = 0.0;
    if (alpha[i] <= kBoundEps)
      v = std::max(0.0, 1.0 - margin);
    else if (alpha[i] >= c - kBoundEps)
      v = std::max(0.0, margin - 1.0);
    else
      v = std::abs(margin - 1.0);
    worst = std::max(worst, v);
  }
  return worst;
}

inline double sum_alpha_y(const BinarySvmModel& m) {
  std::vector<double> terms(m.alphas.size());
  for (std::size_t i = 0; i < m.alphas.size(); ++i) terms[i] = m.alphas[i] * m.labels[i];
  return stable_sum(terms);
}

// Per-dimension standardization fitted on training vectors, applied before
// kernel evaluation so one sigma covers dimensions of different scales.
struct Standardizer {
  std::vector<double> mean, std;

  static Standardizer fit(const std::vector<std::vector<double>>& xs) {
    if (xs.empty()) throw std::invalid_argument("standardizer: empty training set");
    const std::size_t d = xs[0].size();
    Standardizer s;
    s.mean.assign(d, 0.0);
    s.std.assign(d, 0.0);
    for (const auto& x : xs)
      for (std::size_t j = 0; j < d; ++j) s.mean[j] += x[j];
    for (auto& mj : s.mean) mj /= static_cast<double>(xs.size());
    for (const auto& x : xs)
      for (std::size_t j = 0; j < d; ++j) {
        const double dj = x[j] - s.mean[j];
        s.std[j] += dj * dj;
      }
    for (auto& sj : s.std)
      sj = std::max(std::sqrt(sj / static_cast<double>(xs.size())), 1e-9);
    return s;
  }

  std::vector<double> apply(const std::vector<double>& x) const {
    std::vector<double> z(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) z[j] = (x[j] - mean[j]) / std[j];
    return z;
  }
};

// Classification outcome: a class, or rejection by every one-vs-rest model.
using Prediction = std::optional<EventClass>;

struct MultiSvmModel {
  int sps = 0;
  int pca_k = 6;
  SvmHyperParams hyper;
  Standardizer stats;
  std::vector<BinarySvmModel> members;  // ordered by class code 1..3
  bool converged = true;
};

// Trains the three class-vs-rest models on eigenvalue vectors.
inline MultiSvmModel train_multi_svm(const std::vector<std::vector<double>>& xs,
                                     const std::vector<EventClass>& ys,
                                     const SvmHyperParams& h, SmoTrace* trace = nullptr) {
  if (xs.size() != ys.size() || xs.empty())
    throw std::invalid_argument("train_multi_svm: inputs empty or mismatched");
  MultiSvmModel model;
  model.hyper = h;
  model.stats = Standardizer::fit(xs);
  std::vector<std::vector<double>> z(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) z[i] = model.stats.apply(xs[i]);
  for (EventClass cls : kAllClasses) {
    std::vector<int> y(ys.size());
    for (std::size_t i = 0; i < ys.size(); ++i) y[i] = ys[i] == cls ? 1 : -1;
    model.members.push_back(smo_train(z, y, h, trace));
    model.converged = model.converged && model.members.back().converged;
  }
  return model;
}

inline std::array<double, 3> ova_decision_values(const MultiSvmModel& m,
                                                 const std::vector<double>& x) {
  const std::vector<double> z = m.stats.apply(x);
  std::array<double, 3> f{};
  for (std::size_t c = 0; c < 3; ++c) f[c] = svm_decision(m.members[c], z);
  return f;
}

// All decision values nonpositive -> NonClassified; otherwise the class
// with the largest value, ties broken toward the lowest class code.
inline Prediction ova_predict(const MultiSvmModel& m, const std::vector<double>& x) {
  const std::array<double, 3> f = ova_decision_values(m, x);
  int best = -1;
  for (int c = 0; c < 3; ++c) {
    if (f[c] > 0.0 && (best < 0 || f[c] > f[best])) best = c;
  }
  if (best < 0) return std::nullopt;
  return class_from_code(best + 1);
}

// Record-level pipeline: feature matrix -> k dominant eigenvalues -> SVM.
inline std::vector<double> pca_svm_features(const EventRecord& r, int pca_k) {
  return pca_eigenvalues(build_feature_matrix(r), pca_k).eigenvalues;
}

inline MultiSvmModel train_pca_svm(const std::vector<const EventRecord*>& train,
                                   const SvmHyperParams& h, int pca_k, int sps) {
  std::vector<std::vector<double>> xs;
  std::vector<EventClass> ys;
  xs.reserve(train.size());
  ys.reserve(train.size());
  for (const EventRecord* r : train) {
    xs.push_back(pca_svm_features(*r, pca_k));
    ys.push_back(r->label);
  }
  MultiSvmModel m = train_multi_svm(xs, ys, h);
  m.pca_k = pca_k;
  m.sps = sps;
  return m;
}

inline Prediction pca_svm_predict(const MultiSvmModel& m, const EventRecord& r) {
  return ova_predict(m, pca_svm_features(r, m.pca_k));
}

// 3-fold cross-validated grid search over {c} x {sigma}; ties go to the
// earliest candidate in enumeration order.
inline SvmHyperParams grid_search_svm(const std::vector<std::vector<double>>& xs,
                                      const std::vector<EventClass>& ys,
                                      std::uint64_t seed,
                                      const SvmHyperParams& base = SvmHyperParams{}) {
  const std::vector<double> cs = {1.0, 10.0, 100.0};
  const std::vector<double> sigmas = {0.5, 1.0, 2.0};
  const int folds = 3;
  std::vector<std::size_t> order(xs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(mix_seed(seed, 0x9c1dull));
  shuffle(order, rng);

  SvmHyperParams best = base;
  double best_acc = -1.0;
  for (double c : cs) {
    for (double sigma : sigmas) {
      SvmHyperParams h = base;
      h.c = c;
      h.sigma = sigma;
      std::size_t correct = 0, total = 0;
      for (int f = 0; f < folds; ++f) {
        std::vector<std::vector<double>> xtr, xte;
        std::vector<EventClass> ytr, yte;
        for (std::size_t k = 0; k < order.size(); ++k) {
          const std::size_t i = order[k];
          if (static_cast<int>(k % folds) == f) {
            xte.push_back(xs[i]);
            yte.push_back(ys[i]);
          } else {
            xtr.push_back(xs[i]);
            ytr.push_back(ys[i]);
          }
        }
        const MultiSvmModel m = train_multi_svm(xtr, ytr, h);
        for (std::size_t i = 0; i < xte.size(); ++i) {
          const Prediction p = ova_predict(m, xte[i]);
          correct += p && *p == yte[i] ? 1 : 0;
          ++total;
        }
      }
      const double acc = total ? static_cast<double>(correct) / total : 0.0;
      if (acc > best_acc) {
        best_acc = acc;
        best = h;
      }
    }
  }
  return best;
}

// --- model file round trip ---------------------------------------------

inline constexpr int kSvmModelSchemaVersion = 1;

inline nlohmann::json multi_svm_to_json(const MultiSvmModel& m) {
  nlohmann::json j;
  j["schema_version"] = kSvmModelSchemaVersion;
  j["kind"] = "pca-svm";
  j["sps"] = m.sps;
  j["pca_k"] = m.pca_k;
  j["converged"] = m.converged;
  j["hyper"] = {{"c", m.hyper.c},
                {"sigma", m.hyper.sigma},
                {"tol", m.hyper.tol},
                {"max_passes", m.hyper.max_passes}};
  j["standardize"] = {{"mean", m.stats.mean}, {"std", m.stats.std}};
  auto& members = j["members"] = nlohmann::json::array();
  for (const auto& b : m.members) {
    members.push_back({{"support_vectors", b.support_vectors},
                       {"alphas", b.alphas},
                       {"labels", b.labels},
                       {"sv_indices", b.sv_indices},
                       {"bias", b.bias},
                       {"sigma", b.sigma},
                       {"converged", b.converged}});
  }
  return j;
}

inline MultiSvmModel multi_svm_from_json(const nlohmann::json& j) {
  if (j.at("schema_version").get<int>() != kSvmModelSchemaVersion)
    throw IoError("unsupported svm model schema version");
  MultiSvmModel m;
  m.sps = j.at("sps").get<int>();
  m.pca_k = j.at("pca_k").get<int>();
  m.converged = j.at("converged").get<bool>();
  const auto& h = j.at("hyper");
  m.hyper.c = h.at("c").get<double>();
  m.hyper.sigma = h.at("sigma").get<double>();
  m.hyper.tol = h.at("tol").get<double>();
  m.hyper.max_passes = h.at("max_passes").get<int>();
  m.stats.mean = j.at("standardize").at("mean").get<std::vector<double>>();
  m.stats.std = j.at("standardize").at("std").get<std::vector<double>>();
  for (const auto& bj : j.at("members")) {
    BinarySvmModel b;
    b.support_vectors = bj.at("support_vectors").get<std::vector<std::vector<double>>>();
    b.alphas = bj.at("alphas").get<std::vector<double>>();
    b.labels = bj.at("labels").get<std::vector<double>>();
    b.sv_indices = bj.at("sv_indices").get<std::vector<std::size_t>>();
    b.bias = bj.at("bias").get<double>();
    b.sigma = bj.at("sigma").get<double>();
    b.converged = bj.at("converged").get<bool>();
    m.members.push_back(std::move(b));
  }
  return m;
}

inline void save_multi_svm(const MultiSvmModel& m, const std::filesystem::path& path) {
  atomic_write_file(path, multi_svm_to_json(m).dump() + "\n");
}

inline MultiSvmModel load_multi_svm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open model: " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("bad model file: ") + e.what());
  }
  return multi_svm_from_json(j);
}

}  // namespace pmuevent
