#include <catch2/catch_amalgamated.hpp>

#include <set>

#include "pmuevent/eval.hpp"
#include "support/tempdir.hpp"

using namespace pmuevent;

namespace {

ConfusionMatrix table(const std::array<std::array<std::int64_t, 4>, 3>& counts) {
  ConfusionMatrix cm;
  cm.counts = counts;
  for (const auto& row : counts)
    for (std::int64_t c : row) cm.total += c;
  return cm;
}

// the paper-style 50%-split confusion matrices used as arithmetic fixtures
const ConfusionMatrix kSvmTable = table({{{53, 7, 12, 3}, {8, 54, 6, 7}, {10, 2, 62, 1}}});
const ConfusionMatrix kAeTable = table({{{63, 6, 6, 0}, {9, 59, 7, 0}, {5, 3, 67, 0}}});

// small but separable generator settings for fast end-to-end checks
GeneratorConfig easy_config() {
  GeneratorConfig cfg;
  cfg.noise_std_fraction = 0.0;
  cfg.cap_step_v = 0.2;
  cfg.tap_step_v = 0.1;
  return cfg;
}

HyperConfig cheap_hyper() {
  HyperConfig h;
  h.ae.epochs_ae = 25;
  h.ae.epochs_softmax = 60;
  return h;
}

}  // namespace

TEST_CASE("accuracy reproduces the reference table arithmetic") {
  CHECK(accuracy(kSvmTable) == Catch::Approx(0.7511).margin(1e-4));
  CHECK(accuracy(kAeTable) == Catch::Approx(0.84).margin(1e-4));

  ConfusionMatrix perfect;
  perfect.counts = {{{75, 0, 0, 0}, {0, 75, 0, 0}, {0, 0, 75, 0}}};
  perfect.total = 225;
  CHECK(accuracy(perfect) == 1.0);

  CHECK_THROWS_AS(accuracy(ConfusionMatrix{}), std::invalid_argument);
}

TEST_CASE("percentage rendering matches the count (pp.pp%) format") {
  CHECK(render_count_pct(53, 225) == "53 (23.56%)");
  CHECK(render_count_pct(0, 225) == "0 (0.00%)");
  CHECK(render_count_pct(63, 225) == "63 (28.00%)");

  const auto pct = confusion_percentages(kSvmTable);
  CHECK(pct[0][0] == Catch::Approx(23.5555555).margin(1e-6));
  double sum = 0.0;
  for (const auto& row : pct)
    for (double p : row) sum += p;
  CHECK(sum == Catch::Approx(100.0).margin(0.01));

  ConfusionMatrix with_empty_row = kSvmTable;
  with_empty_row.counts[1] = {0, 0, 0, 0};
  with_empty_row.total = 150;
  const auto empty_pct = confusion_percentages(with_empty_row);
  for (double p : empty_pct[1]) CHECK(p == 0.0);
}

TEST_CASE("confusion json carries counts, cells, and accuracy") {
  const nlohmann::json j = confusion_to_json(kSvmTable);
  CHECK(j["total"] == 225);
  CHECK(j["counts"][0][0] == 53);
  CHECK(j["cells"][0][0] == "53 (23.56%)");
  CHECK(j["cells"][2][3] == "1 (0.44%)");
  CHECK(j["accuracy"].get<double>() == Catch::Approx(0.751111).margin(1e-5));
}

TEST_CASE("stratified split: 75 per class at one half, disjoint and exhaustive") {
  GeneratorConfig cfg;
  const Dataset ds = build_dataset(cfg);
  const Split split = stratified_split(ds, 0.5, 42);

  std::map<EventClass, int> test_counts;
  for (std::size_t i : split.test_idx) ++test_counts[ds.records[i].label];
  CHECK(test_counts[EventClass::CapacitorSwitch] == 75);
  CHECK(test_counts[EventClass::OltcSwitch] == 75);
  CHECK(test_counts[EventClass::AbruptLoadChange] == 75);

  std::set<std::size_t> seen(split.train_idx.begin(), split.train_idx.end());
  for (std::size_t i : split.test_idx) CHECK(seen.insert(i).second);
  CHECK(seen.size() == ds.records.size());

  const Split again = stratified_split(ds, 0.5, 42);
  CHECK(again.train_idx == split.train_idx);
  CHECK(again.test_idx == split.test_idx);
  const Split other = stratified_split(ds, 0.5, 43);
  CHECK(other.train_idx != split.train_idx);

  // round(0.3 * 150) = 45 training records per class
  const Split smaller = stratified_split(ds, 0.3, 1);
  CHECK(smaller.train_idx.size() == 135);

  CHECK_THROWS_AS(stratified_split(ds, 0.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(stratified_split(ds, 1.0, 1), std::invalid_argument);
  Dataset tiny;
  tiny.sps = ds.sps;
  for (int i = 0; i < 3; ++i) tiny.records.push_back(ds.records[i * 150]);
  CHECK_THROWS_AS(stratified_split(tiny, 0.1, 1), std::invalid_argument);
}

TEST_CASE("per-class subsampling keeps the requested counts") {
  GeneratorConfig cfg;
  const Dataset ds = build_dataset(cfg);
  const Dataset sub = subsample_per_class(ds, 30, 7);
  CHECK(sub.records.size() == 90);
  const auto counts = class_counts(sub);
  for (EventClass c : kAllClasses) CHECK(counts.at(c) == 30);
  CHECK_THROWS_AS(subsample_per_class(sub, 31, 7), std::invalid_argument);

  const Dataset sub2 = subsample_per_class(ds, 30, 7);
  for (std::size_t i = 0; i < sub.records.size(); ++i)
    CHECK(sub.records[i].seed == sub2.records[i].seed);
}

TEST_CASE("train_and_eval keeps the confusion row sums at the class test counts") {
  const Dataset ds = build_dataset(easy_config());
  const Dataset small = subsample_per_class(ds, 12, 3);
  const Split split = stratified_split(small, 0.5, 9);

  for (Method method : {Method::PcaSvm, Method::AeSoftmax}) {
    const TrainEvalResult r = train_and_eval(small, split, method, cheap_hyper(), 1);
    CHECK(r.cm.total == 18);
    for (std::size_t row = 0; row < 3; ++row) {
      std::int64_t sum = 0;
      for (std::int64_t v : r.cm.counts[row]) sum += v;
      CHECK(sum == 6);
    }
    if (method == Method::AeSoftmax)
      for (std::size_t row = 0; row < 3; ++row)
        CHECK(r.cm.counts[row][kNonClassifiedCol] == 0);
  }
}

TEST_CASE("leave-one-out is perfect on trivially separable records") {
  // three records per class; each fold still sees both of the held-out
  // record's classmates
  const GeneratorConfig cfg = easy_config();
  Dataset ds;
  ds.sps = cfg.sps;
  for (int i = 0; i < 3; ++i) {
    ScenarioParams cap;
    cap.load_index = i;
    cap.loading_fraction = 0.5 + 0.15 * i;
    cap.event_time = 0.4;
    ds.records.push_back(synth_record(EventClass::CapacitorSwitch, cap, cfg, 100 + i));
    ScenarioParams oltc = cap;
    ds.records.push_back(synth_record(EventClass::OltcSwitch, oltc, cfg, 200 + i));
    ScenarioParams step;
    step.load_index = i;
    step.load_step_fraction = 0.25;
    step.event_time = 0.4;
    ds.records.push_back(synth_record(EventClass::AbruptLoadChange, step, cfg, 300 + i));
  }

  for (Method method : {Method::PcaSvm, Method::AeSoftmax}) {
    CHECK(leave_one_out(ds, method, cheap_hyper(), 17) == 1.0);
  }

  // record order does not change the outcome here
  Dataset reversed;
  reversed.sps = ds.sps;
  reversed.records.assign(ds.records.rbegin(), ds.records.rend());
  CHECK(leave_one_out(reversed, Method::PcaSvm, cheap_hyper(), 17) == 1.0);

  Dataset lone;
  lone.sps = ds.sps;
  lone.records.push_back(ds.records[0]);
  CHECK_THROWS_AS(leave_one_out(lone, Method::PcaSvm, cheap_hyper(), 1),
                  std::invalid_argument);
}

TEST_CASE("sweep emits one sorted row per cell and a stable csv") {
  GeneratorConfig base;
  base.noise_std_fraction = 0.0;
  base.cap_step_v = 0.2;
  base.tap_step_v = 0.1;

  const std::vector<SweepRow> rows =
      run_sweep({0.5, 0.3}, {60}, {Method::PcaSvm}, {2, 1}, base, cheap_hyper());
  REQUIRE(rows.size() == 4);
  CHECK(rows[0].fraction == 0.3);
  CHECK(rows[0].seed == 1);
  CHECK(rows[1].seed == 2);
  CHECK(rows[2].fraction == 0.5);
  for (const auto& r : rows) {
    CHECK(r.accuracy >= 0.0);
    CHECK(r.accuracy <= 1.0);
    CHECK(r.sps == 60);
  }

  const std::string csv = sweep_csv(rows);
  CHECK(csv.rfind("method,sps,fraction,seed,accuracy\n", 0) == 0);
  CHECK(csv.find("pca-svm,60,0.3,1,") != std::string::npos);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);

  CHECK_THROWS_AS(run_sweep({}, {60}, {Method::PcaSvm}, {1}, base, cheap_hyper()),
                  std::invalid_argument);
}

TEST_CASE("method names parse both ways") {
  CHECK(method_name(Method::PcaSvm) == "pca-svm");
  CHECK(method_name(Method::AeSoftmax) == "ae-softmax");
  CHECK(method_from_name("pca-svm") == Method::PcaSvm);
  CHECK(method_from_name("ae-softmax") == Method::AeSoftmax);
  CHECK_THROWS_AS(method_from_name("svm"), std::invalid_argument);
}
