#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "pmuevent/synth.hpp"
#include "support/oracles.hpp"

using namespace pmuevent;

namespace {

GeneratorConfig noise_free() {
  GeneratorConfig cfg;
  cfg.noise_std_fraction = 0.0;
  return cfg;
}

ScenarioParams loading_scenario(double loading, double event_time, int load_index = 0) {
  ScenarioParams sc;
  sc.load_index = load_index;
  sc.loading_fraction = loading;
  sc.event_time = event_time;
  return sc;
}

ScenarioParams step_scenario(double step, double event_time, int load_index = 0) {
  ScenarioParams sc;
  sc.load_index = load_index;
  sc.load_step_fraction = step;
  sc.event_time = event_time;
  return sc;
}

}  // namespace

TEST_CASE("steady solve agrees with an independent fixed-point iteration") {
  const GeneratorConfig cfg;
  for (double i_load : {0.1, 0.4, 0.76}) {
    for (double i_cap : {0.0, 0.2}) {
      const SteadyState st = solve_steady(cfg, i_load, i_cap);
      const auto ref = oracles::fixed_point_thevenin(
          cfg.thevenin_source, cfg.thevenin_impedance_mag, cfg.thevenin_impedance_ang_deg,
          i_load, 18.19, i_cap);
      CHECK(st.v_mag == Catch::Approx(std::abs(ref.v)).margin(1e-9));
      CHECK(st.v_ang_deg ==
            Catch::Approx(std::arg(ref.v) * 180.0 / M_PI).margin(1e-9));
      CHECK(st.i_mag == Catch::Approx(std::abs(ref.i)).margin(1e-9));
      CHECK(st.i_ang_deg ==
            Catch::Approx(std::arg(ref.i) * 180.0 / M_PI).margin(1e-9));
    }
  }
}

TEST_CASE("capacitor window is piecewise: level, one-cycle ramp, raised level") {
  const GeneratorConfig cfg = noise_free();
  const EventRecord rec =
      synth_record(EventClass::CapacitorSwitch, loading_scenario(0.7, 0.5), cfg, 11);
  REQUIRE(rec.samples.size() == 60);
  const double v_pre = rec.samples[0].v_mag;
  // t < 0.5 plus the ramp start at exactly t = 0.5
  for (int k = 0; k <= 30; ++k) CHECK(rec.samples[k].v_mag == Catch::Approx(v_pre).margin(1e-12));
  // ramp width is one cycle = one sample gap at 60 sps, so k >= 31 is post
  for (int k = 31; k < 60; ++k)
    CHECK(rec.samples[k].v_mag == Catch::Approx(v_pre + cfg.cap_step_v).margin(1e-12));
  // reactive injection swings the feeder current toward leading
  CHECK(rec.samples[59].i_ang > rec.samples[0].i_ang + 1.0);
}

TEST_CASE("capacitor sizing hits the configured voltage rise exactly") {
  const GeneratorConfig cfg = noise_free();
  for (double loading : {0.5, 0.95}) {
    const double i_load = cfg.base_load_current * loading;
    const SteadyState pre = solve_steady(cfg, i_load);
    const double icap = solve_cap_current(cfg, i_load, pre.v_mag + cfg.cap_step_v);
    const SteadyState post = solve_steady(cfg, i_load, icap);
    CHECK(post.v_mag == Catch::Approx(pre.v_mag + cfg.cap_step_v).margin(1e-12));
  }
}

TEST_CASE("oltc window dislocates, dwells, and relocates to the original level") {
  const GeneratorConfig cfg = noise_free();
  for (std::uint64_t seed : {1ull, 2ull, 3ull, 17ull, 400ull}) {
    const EventRecord rec =
        synth_record(EventClass::OltcSwitch, loading_scenario(0.6, 0.35), cfg, seed);
    const double v0 = rec.samples[0].v_mag;
    CHECK(std::abs(rec.samples[59].v_mag - v0) < 1e-12);

    // some samples sit on the dislocated plateau, one tap step away
    double peak_dev = 0.0;
    for (const auto& s : rec.samples) peak_dev = std::max(peak_dev, std::abs(s.v_mag - v0));
    CHECK(peak_dev == Catch::Approx(cfg.tap_step_v).margin(1e-12));

    // the trace never overshoots the plateau and only v_mag moves
    for (const auto& s : rec.samples) {
      CHECK(std::abs(s.v_mag - v0) < cfg.tap_step_v + 1e-12);
      CHECK(s.v_ang == rec.samples[0].v_ang);
      CHECK(s.i_mag == rec.samples[0].i_mag);
      CHECK(s.i_ang == rec.samples[0].i_ang);
    }
  }
}

TEST_CASE("load step scales current by exactly one plus the step fraction") {
  const GeneratorConfig cfg = noise_free();
  const EventRecord rec =
      synth_record(EventClass::AbruptLoadChange, step_scenario(0.25, 0.5), cfg, 3);
  const double pre = rec.samples[0].i_mag;
  const double post = rec.samples[59].i_mag;
  CHECK(post / pre == Catch::Approx(1.25).margin(1e-9));

  // both levels agree with the independent fixed-point solve
  const auto scales = load_scales(cfg);
  const double i_load = cfg.base_load_current * 0.70 * scales[0];
  const auto ref_pre = oracles::fixed_point_thevenin(
      cfg.thevenin_source, cfg.thevenin_impedance_mag, cfg.thevenin_impedance_ang_deg,
      i_load, 18.19);
  const auto ref_post = oracles::fixed_point_thevenin(
      cfg.thevenin_source, cfg.thevenin_impedance_mag, cfg.thevenin_impedance_ang_deg,
      i_load * 1.25, 18.19);
  CHECK(rec.samples[0].v_mag == Catch::Approx(std::abs(ref_pre.v)).margin(1e-9));
  CHECK(rec.samples[59].v_mag == Catch::Approx(std::abs(ref_post.v)).margin(1e-9));
  CHECK(pre == Catch::Approx(std::abs(ref_pre.i)).margin(1e-9));
  CHECK(post == Catch::Approx(std::abs(ref_post.i)).margin(1e-9));

  // the step happens in a single sample
  int changes = 0;
  for (std::size_t k = 1; k < rec.samples.size(); ++k)
    if (rec.samples[k].i_mag != rec.samples[k - 1].i_mag) ++changes;
  CHECK(changes == 1);
}

TEST_CASE("noise: zero fraction is the identity, same seed is reproducible") {
  GeneratorConfig cfg;
  const EventRecord rec =
      synth_record(EventClass::CapacitorSwitch, loading_scenario(0.8, 0.4), cfg, 21);
  const EventRecord same = add_noise(rec, 0.0, 123);
  for (std::size_t k = 0; k < rec.samples.size(); ++k) {
    CHECK(same.samples[k].v_mag == rec.samples[k].v_mag);
    CHECK(same.samples[k].i_ang == rec.samples[k].i_ang);
  }
  const EventRecord n1 = add_noise(rec, 0.01, 77);
  const EventRecord n2 = add_noise(rec, 0.01, 77);
  for (std::size_t k = 0; k < rec.samples.size(); ++k) {
    CHECK(n1.samples[k].v_mag == n2.samples[k].v_mag);
    CHECK(n1.samples[k].v_ang == n2.samples[k].v_ang);
    CHECK(n1.samples[k].i_mag == n2.samples[k].i_mag);
    CHECK(n1.samples[k].i_ang == n2.samples[k].i_ang);
  }
  CHECK(n1.samples[0].v_mag != rec.samples[0].v_mag);
}

TEST_CASE("noise standard deviation tracks the configured fraction") {
  // flat 1.0 pu window so sigma should be exactly the fraction
  EventRecord flat;
  flat.label = EventClass::OltcSwitch;
  flat.sps = 60;
  flat.scenario.loading_fraction = 0.5;
  flat.scenario.event_time = 0.5;
  flat.samples.resize(60);
  for (int k = 0; k < 60; ++k)
    flat.samples[k] = {k / 60.0, 1.0, 10.0, 0.5, -20.0};

  double sum = 0.0, sq = 0.0;
  std::size_t n = 0;
  for (std::uint64_t seed = 0; seed < 2000; ++seed) {
    const EventRecord noisy = add_noise(flat, 0.01, seed);
    for (int k = 0; k < 60; ++k) {
      const double d = noisy.samples[k].v_mag - 1.0;
      sum += d;
      sq += d * d;
      ++n;
    }
  }
  const double mean = sum / n;
  const double std = std::sqrt((sq - n * mean * mean) / (n - 1));
  CHECK(std > 0.0099);
  CHECK(std < 0.0101);
}

TEST_CASE("build_dataset: grid shape, determinism, event time range") {
  GeneratorConfig cfg;
  cfg.master_seed = 5;
  const Dataset ds = build_dataset(cfg);
  REQUIRE(ds.records.size() == 450);
  const auto counts = class_counts(ds);
  CHECK(counts.at(EventClass::CapacitorSwitch) == 150);
  CHECK(counts.at(EventClass::OltcSwitch) == 150);
  CHECK(counts.at(EventClass::AbruptLoadChange) == 150);

  for (const auto& r : ds.records) {
    CHECK(r.scenario.event_time >= 0.2);
    CHECK(r.scenario.event_time <= 0.6);
    CHECK_NOTHROW(validate_record(r));
  }

  const Dataset again = build_dataset(cfg);
  REQUIRE(again.records.size() == ds.records.size());
  for (std::size_t i = 0; i < ds.records.size(); ++i)
    for (std::size_t k = 0; k < ds.records[i].samples.size(); ++k) {
      CHECK(ds.records[i].samples[k].v_mag == again.records[i].samples[k].v_mag);
      CHECK(ds.records[i].samples[k].i_ang == again.records[i].samples[k].i_ang);
    }
}

TEST_CASE("every record regenerates bit-exactly from its stored seed and scenario") {
  GeneratorConfig cfg;
  cfg.master_seed = 31;
  const Dataset ds = build_dataset(cfg);
  for (std::size_t i = 0; i < ds.records.size(); i += 37) {
    const auto& r = ds.records[i];
    const EventRecord again = synth_record(r.label, r.scenario, cfg, r.seed);
    for (std::size_t k = 0; k < r.samples.size(); ++k) {
      CHECK(r.samples[k].v_mag == again.samples[k].v_mag);
      CHECK(r.samples[k].v_ang == again.samples[k].v_ang);
      CHECK(r.samples[k].i_mag == again.samples[k].i_mag);
      CHECK(r.samples[k].i_ang == again.samples[k].i_ang);
    }
  }
}

TEST_CASE("noise-free class signatures: monotone steps and oltc revert") {
  GeneratorConfig cfg = noise_free();
  cfg.master_seed = 8;
  const Dataset ds = build_dataset(cfg);
  for (const auto& r : ds.records) {
    const double v0 = r.samples[0].v_mag;
    const double v_end = r.samples.back().v_mag;
    switch (r.label) {
      case EventClass::CapacitorSwitch:
        CHECK(v_end == Catch::Approx(v0 + cfg.cap_step_v).margin(1e-12));
        break;
      case EventClass::OltcSwitch: {
        CHECK(std::abs(v_end - v0) < 1e-12);
        double peak = 0.0;
        for (const auto& s : r.samples) peak = std::max(peak, std::abs(s.v_mag - v0));
        CHECK(peak == Catch::Approx(cfg.tap_step_v).margin(1e-12));
        break;
      }
      case EventClass::AbruptLoadChange: {
        int changes = 0;
        for (std::size_t k = 1; k < r.samples.size(); ++k)
          if (r.samples[k].i_mag != r.samples[k - 1].i_mag) ++changes;
        CHECK(changes == 1);
        break;
      }
    }
  }
}

TEST_CASE("generated voltages stay inside the sanity band") {
  for (std::uint64_t seed : {1ull, 9001ull}) {
    GeneratorConfig cfg;
    cfg.master_seed = seed;
    const Dataset ds = build_dataset(cfg);
    for (const auto& r : ds.records)
      for (const auto& s : r.samples) {
        CHECK(s.v_mag > 0.8);
        CHECK(s.v_mag < 1.1);
      }
  }
}

TEST_CASE("events that cannot fit in the window are rejected") {
  GeneratorConfig cfg;
  CHECK_THROWS_AS(
      synth_record(EventClass::CapacitorSwitch, loading_scenario(0.6, 0.995), cfg, 1),
      std::invalid_argument);
  CHECK_THROWS_AS(synth_record(EventClass::OltcSwitch, loading_scenario(0.6, 0.9), cfg, 1),
                  std::invalid_argument);
  // mismatched scenario/class pairing
  CHECK_THROWS_AS(synth_record(EventClass::AbruptLoadChange, loading_scenario(0.6, 0.4), cfg, 1),
                  std::invalid_argument);
}

TEST_CASE("generator config file: parsing, precedence, and rejection") {
  std::istringstream good(
      "# comment line\n"
      "sps = 120\n"
      "cap_step_v = 0.02   # trailing comment\n"
      "master_seed = 42\n");
  const GeneratorConfig cfg = parse_generator_config(good);
  CHECK(cfg.sps == 120);
  CHECK(cfg.cap_step_v == 0.02);
  CHECK(cfg.master_seed == 42);
  CHECK(cfg.tap_step_v == GeneratorConfig{}.tap_step_v);

  std::istringstream unknown("caep_step = 1\n");
  CHECK_THROWS_AS(parse_generator_config(unknown), std::invalid_argument);
  std::istringstream not_number("cap_step_v = big\n");
  CHECK_THROWS_AS(parse_generator_config(not_number), std::invalid_argument);
  std::istringstream no_equals("cap_step_v 0.5\n");
  CHECK_THROWS_AS(parse_generator_config(no_equals), std::invalid_argument);
  std::istringstream invalid("noise_std_fraction = -1\n");
  CHECK_THROWS_AS(parse_generator_config(invalid), std::invalid_argument);
}
