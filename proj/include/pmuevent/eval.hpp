// Evaluation protocol: stratified splits, confusion matrices with a
// non-classified column, accuracy, leave-one-out, and training-fraction /
// sampling-rate sweeps.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <tuple>
#include <variant>
#include <vector>

#include <json.hpp>

#include "pmuevent/ae_softmax.hpp"
#include "pmuevent/dataset_io.hpp"
#include "pmuevent/parallel.hpp"
#include "pmuevent/phasor.hpp"
#include "pmuevent/svm.hpp"
#include "pmuevent/synth.hpp"

namespace pmuevent {

// Rows: actual classes 1..3. Columns: predicted 1..3 plus NonClassified.
struct ConfusionMatrix {
  std::array<std::array<std::int64_t, 4>, 3> counts{};
  std::int64_t total = 0;
};

inline constexpr std::size_t kNonClassifiedCol = 3;

inline void confusion_add(ConfusionMatrix& cm, EventClass actual, const Prediction& p) {
  const std::size_t row = static_cast<std::size_t>(class_code(actual) - 1);
  const std::size_t col = p ? static_cast<std::size_t>(class_code(*p) - 1) : kNonClassifiedCol;
  ++cm.counts[row][col];
  ++cm.total;
}

// Fraction of accurate classifications; non-classified counts as wrong.
inline double accuracy(const ConfusionMatrix& cm) {
  if (cm.total <= 0) throw std::invalid_argument("accuracy: empty confusion matrix");
  std::int64_t diag = 0;
  for (std::size_t c = 0; c < 3; ++c) diag += cm.counts[c][c];
  return static_cast<double>(diag) / static_cast<double>(cm.total);
}

// Cell shares of the full test set, in percent.
inline std::array<std::array<double, 4>, 3> confusion_percentages(const ConfusionMatrix& cm) {
  if (cm.total <= 0) throw std::invalid_argument("confusion_percentages: empty matrix");
  std::array<std::array<double, 4>, 3> pct{};
  for (std::size_t r = 0; r < 3; ++r)
    for (std::size_t c = 0; c < 4; ++c)
      pct[r][c] = 100.0 * static_cast<double>(cm.counts[r][c]) / static_cast<double>(cm.total);
  return pct;
}

// "53 (23.56%)" rendering used in reports.
inline std::string render_count_pct(std::int64_t count, std::int64_t total) {
  const double pct = 100.0 * static_cast<double>(count) / static_cast<double>(total);
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%lld (%.2f%%)", static_cast<long long>(count), pct);
  return buf;
}

inline nlohmann::json confusion_to_json(const ConfusionMatrix& cm) {
  nlohmann::json j;
  j["total"] = cm.total;
  j["accuracy"] = accuracy(cm);
  j["rows"] = {"class 1", "class 2", "class 3"};
  j["columns"] = {"class 1", "class 2", "class 3", "non-classified"};
  auto& counts = j["counts"] = nlohmann::json::array();
  auto& cells = j["cells"] = nlohmann::json::array();
  for (std::size_t r = 0; r < 3; ++r) {
    counts.push_back(cm.counts[r]);
    nlohmann::json row = nlohmann::json::array();
    for (std::size_t c = 0; c < 4; ++c)
      row.push_back(render_count_pct(cm.counts[r][c], cm.total));
    cells.push_back(row);
  }
  return j;
}

inline void write_confusion(const ConfusionMatrix& cm, const std::filesystem::path& path) {
  atomic_write_file(path, confusion_to_json(cm).dump(2) + "\n");
}

// --- splits ---------------------------------------------------------------

struct Split {
  std::vector<std::size_t> train_idx, test_idx;
};

// Per-class random partition with round(fraction * class count) training
// records from each class; deterministic given seed.
inline Split stratified_split(const Dataset& ds, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0) || !(fraction < 1.0))
    throw std::invalid_argument("split fraction must lie in (0, 1)");
  std::map<EventClass, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < ds.records.size(); ++i)
    by_class[ds.records[i].label].push_back(i);
  Split split;
  Rng rng(mix_seed(seed, 0x511full));
  for (auto& [cls, idx] : by_class) {
    const auto n_train =
        static_cast<std::size_t>(std::llround(fraction * static_cast<double>(idx.size())));
    if (n_train == 0 || n_train == idx.size())
      throw std::invalid_argument("split fraction leaves a class with an empty side");
    shuffle(idx, rng);
    split.train_idx.insert(split.train_idx.end(), idx.begin(), idx.begin() + n_train);
    split.test_idx.insert(split.test_idx.end(), idx.begin() + n_train, idx.end());
  }
  std::sort(split.train_idx.begin(), split.train_idx.end());
  std::sort(split.test_idx.begin(), split.test_idx.end());
  return split;
}

// Keeps per_class records of each class, chosen at random; record order
// follows the source dataset.
inline Dataset subsample_per_class(const Dataset& ds, std::size_t per_class,
                                   std::uint64_t seed) {
  std::map<EventClass, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < ds.records.size(); ++i)
    by_class[ds.records[i].label].push_back(i);
  std::vector<std::size_t> keep;
  Rng rng(mix_seed(seed, 0x5b5aull));
  for (auto& [cls, idx] : by_class) {
    if (idx.size() < per_class)
      throw std::invalid_argument("subsample: class has fewer records than requested");
    shuffle(idx, rng);
    keep.insert(keep.end(), idx.begin(), idx.begin() + per_class);
  }
  std::sort(keep.begin(), keep.end());
  Dataset out;
  out.sps = ds.sps;
  out.records.reserve(keep.size());
  for (std::size_t i : keep) out.records.push_back(ds.records[i]);
  return out;
}

// --- method dispatch --------------------------------------------------------

enum class Method { PcaSvm, AeSoftmax };

inline std::string method_name(Method m) {
  return m == Method::PcaSvm ? "pca-svm" : "ae-softmax";
}

inline Method method_from_name(const std::string& name) {
  if (name == "pca-svm") return Method::PcaSvm;
  if (name == "ae-softmax") return Method::AeSoftmax;
  throw std::invalid_argument("unknown method '" + name +
                              "' (valid: pca-svm, ae-softmax)");
}

struct HyperConfig {
  SvmHyperParams svm{};
  int pca_k = 6;
  TrainConfig ae{};
  int hidden = 50;
};

using TrainedModel = std::variant<MultiSvmModel, AeSoftmaxModel>;

inline TrainedModel train_model(const std::vector<const EventRecord*>& train, Method method,
                                const HyperConfig& hyper, std::uint64_t seed, int sps) {
  if (method == Method::PcaSvm) return train_pca_svm(train, hyper.svm, hyper.pca_k, sps);
  TrainConfig cfg = hyper.ae;
  cfg.seed = seed;
  return train_ae_softmax(train, cfg, hyper.hidden, sps);
}

inline Prediction predict(const TrainedModel& model, const EventRecord& r) {
  if (const auto* svm = std::get_if<MultiSvmModel>(&model)) return pca_svm_predict(*svm, r);
  return ae_softmax_predict(std::get<AeSoftmaxModel>(model), r).first;
}

inline bool model_converged(const TrainedModel& model) {
  if (const auto* svm = std::get_if<MultiSvmModel>(&model)) return svm->converged;
  return true;
}

struct TrainEvalResult {
  TrainedModel model;
  ConfusionMatrix cm;
};

inline TrainEvalResult train_and_eval(const Dataset& ds, const Split& split, Method method,
                                      const HyperConfig& hyper, std::uint64_t seed) {
  std::vector<const EventRecord*> train;
  train.reserve(split.train_idx.size());
  for (std::size_t i : split.train_idx) train.push_back(&ds.records[i]);
  TrainEvalResult out{train_model(train, method, hyper, seed, ds.sps), {}};
  for (std::size_t i : split.test_idx)
    confusion_add(out.cm, ds.records[i].label, predict(out.model, ds.records[i]));
  return out;
}

// --- leave-one-out ----------------------------------------------------------

// Trains on N-1 records and tests the held-out one, for every record.
// Per-fold seeds derive from (seed, fold) so folds are independent.
inline double leave_one_out(const Dataset& ds, Method method, const HyperConfig& hyper,
                            std::uint64_t seed, unsigned threads = 0) {
  const std::size_t n = ds.records.size();
  if (n < 2) throw std::invalid_argument("leave_one_out: need at least 2 records");
  std::vector<char> correct(n, 0);
  parallel_for(
      n,
      [&](std::size_t fold) {
        std::vector<const EventRecord*> train;
        train.reserve(n - 1);
        for (std::size_t i = 0; i < n; ++i)
          if (i != fold) train.push_back(&ds.records[i]);
        const TrainedModel model =
            train_model(train, method, hyper, mix_seed(seed, fold), ds.sps);
        const Prediction p = predict(model, ds.records[fold]);
        correct[fold] = p && *p == ds.records[fold].label ? 1 : 0;
      },
      threads);
  std::size_t hits = 0;
  for (char c : correct) hits += c;
  return static_cast<double>(hits) / static_cast<double>(n);
}

// --- sweeps -----------------------------------------------------------------

struct SweepRow {
  Method method;
  int sps;
  double fraction;
  std::uint64_t seed;
  double accuracy;
};

// One dataset is generated per sampling rate (same master seed) and reused
// across fractions and split seeds.
inline std::vector<SweepRow> run_sweep(const std::vector<double>& fractions,
                                       const std::vector<int>& sps_list,
                                       const std::vector<Method>& methods,
                                       const std::vector<std::uint64_t>& seeds,
                                       const GeneratorConfig& base_cfg,
                                       const HyperConfig& hyper, unsigned threads = 0) {
  if (fractions.empty() || sps_list.empty() || methods.empty() || seeds.empty())
    throw std::invalid_argument("run_sweep: all argument lists must be nonempty");
  std::map<int, Dataset> datasets;
  for (int sps : sps_list) {
    GeneratorConfig cfg = base_cfg;
    cfg.sps = sps;
    datasets.emplace(sps, build_dataset(cfg));
  }
  struct Cell {
    Method method;
    int sps;
    double fraction;
    std::uint64_t seed;
  };
  std::vector<Cell> cells;
  for (Method m : methods)
    for (int sps : sps_list)
      for (double f : fractions)
        for (std::uint64_t s : seeds) cells.push_back({m, sps, f, s});
  std::vector<SweepRow> rows(cells.size());
  parallel_for(
      cells.size(),
      [&](std::size_t i) {
        const Cell& cell = cells[i];
        const Dataset& ds = datasets.at(cell.sps);
        const Split split = stratified_split(ds, cell.fraction, mix_seed(cell.seed, 0x51ull));
        const TrainEvalResult r =
            train_and_eval(ds, split, cell.method, hyper, mix_seed(cell.seed, 0x7eull));
        rows[i] = {cell.method, cell.sps, cell.fraction, cell.seed, accuracy(r.cm)};
      },
      threads);
  std::sort(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) {
    return std::tuple(static_cast<int>(a.method), a.sps, a.fraction, a.seed) <
           std::tuple(static_cast<int>(b.method), b.sps, b.fraction, b.seed);
  });
  return rows;
}

inline std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::string out = "method,sps,fraction,seed,accuracy\n";
  char buf[160];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%s,%d,%.10g,%llu,%.17g\n", method_name(r.method).c_str(),
                  r.sps, r.fraction, static_cast<unsigned long long>(r.seed), r.accuracy);
    out += buf;
  }
  return out;
}

inline void write_sweep_csv(const std::vector<SweepRow>& rows,
                            const std::filesystem::path& path) {
  atomic_write_file(path, sweep_csv(rows));
}

}  // namespace pmuevent
