// Synthetic PMU window generator. A Thevenin source-behind-impedance
// feeder equivalent produces physically coupled voltage/current phasors;
// the three event classes are injected as piecewise transitions on top of
// the steady solution, then per-sample Gaussian measurement noise is added.
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "pmuevent/phasor.hpp"
#include "pmuevent/rng.hpp"

namespace pmuevent {

struct GeneratorConfig {
  int sps = 60;                           // reporting rate, 60 or 120
  double thevenin_source = 1.02;          // pu source voltage
  double thevenin_impedance_mag = 0.05;   // pu
  double thevenin_impedance_ang_deg = 70.0;
  double base_load_current = 0.8;         // pu current at 100% aggregate loading
  double cap_step_v = 0.015;              // pu voltage rise on capacitor switch
  double cap_transition_s = 1.0 / 60.0;   // one cycle
  double tap_step_v = 0.00625;            // pu per regulator tap
  double oltc_transition_min_s = 0.030;
  double oltc_transition_max_s = 0.200;
  double oltc_dwell_min_s = 0.100;
  double oltc_dwell_max_s = 0.500;
  double noise_std_fraction = 0.01;       // sigma = fraction * |measured value|
  std::uint64_t master_seed = 1;
};

namespace detail {
// Load current lags bus voltage by this power-factor angle (cos ~ 0.95).
inline constexpr double kLoadPfAngleDeg = 18.19;
// Pre-event aggregate loading used for class-3 scenarios, where the
// scenario grid varies the step size rather than the loading level.
inline constexpr double kClass3Loading = 0.70;
inline constexpr double kPi = 3.141592653589793238462643383279;

inline double deg2rad(double d) { return d * (kPi / 180.0); }
inline double rad2deg(double r) { return r * (180.0 / kPi); }
}  // namespace detail

inline void validate_config(const GeneratorConfig& cfg) {
  if (cfg.sps != 60 && cfg.sps != 120) throw std::invalid_argument("sps must be 60 or 120");
  if (!(cfg.thevenin_source > 0.0) || !(cfg.thevenin_impedance_mag > 0.0))
    throw std::invalid_argument("thevenin source and impedance must be positive");
  if (!(cfg.base_load_current > 0.0))
    throw std::invalid_argument("base_load_current must be positive");
  if (!(cfg.cap_transition_s > 0.0) || !(cfg.cap_step_v > 0.0) || !(cfg.tap_step_v > 0.0))
    throw std::invalid_argument("event step sizes and transitions must be positive");
  if (!(cfg.oltc_transition_min_s > 0.0) ||
      !(cfg.oltc_transition_max_s >= cfg.oltc_transition_min_s))
    throw std::invalid_argument("bad oltc transition range");
  if (!(cfg.oltc_dwell_min_s > 0.0) || !(cfg.oltc_dwell_max_s >= cfg.oltc_dwell_min_s))
    throw std::invalid_argument("bad oltc dwell range");
  if (!(cfg.noise_std_fraction >= 0.0))
    throw std::invalid_argument("noise_std_fraction must be >= 0");
}

// Steady bus phasors for a constant-current load (plus an optional shunt
// capacitor current leading the bus voltage by 90 degrees), fed from the
// Thevenin source through its impedance: V = E - Z * I.
struct SteadyState {
  double v_mag = 0.0;
  double v_ang_deg = 0.0;
  double i_mag = 0.0;  // feeder current = load current + capacitor current
  double i_ang_deg = 0.0;
};

inline SteadyState solve_steady(const GeneratorConfig& cfg, double load_current,
                                double cap_current = 0.0) {
  using std::complex;
  const double psi = detail::deg2rad(cfg.thevenin_impedance_ang_deg);
  const double phi = detail::deg2rad(detail::kLoadPfAngleDeg);
  // Currents referenced to the (unknown) bus-voltage angle.
  const complex<double> rel = load_current * std::polar(1.0, -phi) +
                              cap_current * std::polar(1.0, detail::kPi / 2.0);
  const complex<double> drop = cfg.thevenin_impedance_mag * std::polar(1.0, psi) * rel;
  const double e = cfg.thevenin_source;
  const double a = drop.real();
  const double b = drop.imag();
  if (e * e <= b * b)
    throw std::domain_error("thevenin solve failed: load too large for source");
  // |V + drop| = |E| with V real-positive in its own frame.
  const double v = std::sqrt(e * e - b * b) - a;
  if (!(v > 0.0)) throw std::domain_error("thevenin solve failed: voltage collapse");
  const double theta = -std::atan2(b, v + a);
  SteadyState st;
  st.v_mag = v;
  st.v_ang_deg = wrap_angle_deg(detail::rad2deg(theta));
  st.i_mag = std::abs(rel);
  st.i_ang_deg = wrap_angle_deg(detail::rad2deg(theta + std::arg(rel)));
  return st;
}

// Capacitor current needed so the bus voltage rises to v_target. Monotone
// in the injection for inductive source impedance, so plain bisection.
inline double solve_cap_current(const GeneratorConfig& cfg, double load_current,
                                double v_target) {
  double lo = 0.0;
  double hi = 0.5;
  while (solve_steady(cfg, load_current, hi).v_mag < v_target) {
    hi *= 2.0;
    if (hi > 64.0) throw std::domain_error("capacitor sizing failed to bracket target");
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    (solve_steady(cfg, load_current, mid).v_mag < v_target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// The 15 loads enter the aggregate model as composition scales around 1,
// drawn once from the master seed and fixed across the dataset.
inline std::vector<double> load_scales(const GeneratorConfig& cfg) {
  Rng rng(mix_seed(cfg.master_seed, 0x10adull));
  std::vector<double> u(15);
  double sum = 0.0;
  for (auto& x : u) {
    x = rng.uniform(0.5, 1.5);
    sum += x;
  }
  const double mean = sum / static_cast<double>(u.size());
  for (auto& x : u) x /= mean;
  return u;
}

// Independent Gaussian noise on each channel of each sample, with standard
// deviation noise_std_fraction * |channel value|. Deterministic given seed;
// metadata (label, scenario, seed) is preserved.
inline EventRecord add_noise(const EventRecord& record, double noise_std_fraction,
                             std::uint64_t seed) {
  if (!(noise_std_fraction >= 0.0))
    throw std::invalid_argument("noise_std_fraction must be >= 0");
  if (noise_std_fraction == 0.0) return record;
  EventRecord out = record;
  Rng rng(mix_seed(seed, 0x4015eull));
  for (auto& s : out.samples) {
    s.v_mag += rng.normal(0.0, noise_std_fraction * std::abs(s.v_mag));
    s.v_ang = wrap_angle_deg(s.v_ang + rng.normal(0.0, noise_std_fraction * std::abs(s.v_ang)));
    s.i_mag += rng.normal(0.0, noise_std_fraction * std::abs(s.i_mag));
    s.i_ang = wrap_angle_deg(s.i_ang + rng.normal(0.0, noise_std_fraction * std::abs(s.i_ang)));
  }
  return out;
}

namespace detail {

inline PhasorSample sample_at(double t, const SteadyState& st) {
  return {t, st.v_mag, st.v_ang_deg, st.i_mag, st.i_ang_deg};
}

inline PhasorSample lerp_sample(double t, const SteadyState& a, const SteadyState& b,
                                double w) {
  PhasorSample s;
  s.t = t;
  s.v_mag = a.v_mag + w * (b.v_mag - a.v_mag);
  s.v_ang = a.v_ang_deg + w * (b.v_ang_deg - a.v_ang_deg);
  s.i_mag = a.i_mag + w * (b.i_mag - a.i_mag);
  s.i_ang = a.i_ang_deg + w * (b.i_ang_deg - a.i_ang_deg);
  return s;
}

}  // namespace detail

// Noise-free window for one scenario, then cfg.noise_std_fraction noise.
// The record is a pure function of (cls, scenario, cfg, seed).
inline EventRecord synth_record(EventClass cls, const ScenarioParams& scenario,
                                const GeneratorConfig& cfg, std::uint64_t seed) {
  validate_config(cfg);
  validate_scenario(cls, scenario);

  const std::vector<double> scales = load_scales(cfg);
  const double loading = cls == EventClass::AbruptLoadChange
                             ? detail::kClass3Loading
                             : *scenario.loading_fraction;
  const double i_pre = cfg.base_load_current * loading * scales[scenario.load_index];
  const SteadyState pre = solve_steady(cfg, i_pre);
  const double te = scenario.event_time;

  EventRecord rec;
  rec.label = cls;
  rec.sps = cfg.sps;
  rec.scenario = scenario;
  rec.seed = seed;
  rec.samples.resize(cfg.sps);

  const auto fill = [&](auto&& value_at) {
    for (int k = 0; k < cfg.sps; ++k) {
      const double t = static_cast<double>(k) / cfg.sps;
      rec.samples[k] = value_at(t);
    }
  };

  // transitions and dwell must complete by the last sample, or the event
  // signature is cut off mid-shape
  const double window_end = static_cast<double>(cfg.sps - 1) / cfg.sps;

  switch (cls) {
    case EventClass::CapacitorSwitch: {
      if (te + cfg.cap_transition_s > window_end)
        throw std::invalid_argument("capacitor event does not fit in the 1 s window");
      const double icap = solve_cap_current(cfg, i_pre, pre.v_mag + cfg.cap_step_v);
      const SteadyState post = solve_steady(cfg, i_pre, icap);
      fill([&](double t) {
        if (t < te) return detail::sample_at(t, pre);
        if (t < te + cfg.cap_transition_s)
          return detail::lerp_sample(t, pre, post, (t - te) / cfg.cap_transition_s);
        return detail::sample_at(t, post);
      });
      break;
    }
    case EventClass::OltcSwitch: {
      const double min_total =
          2.0 * cfg.oltc_transition_min_s + cfg.oltc_dwell_min_s;
      if (te + min_total > window_end)
        throw std::invalid_argument("oltc event does not fit in the 1 s window");
      Rng ev(mix_seed(seed, 0x01c7ull));
      const double sign = ev.uniform01() < 0.5 ? -1.0 : 1.0;
      double t_up, dwell, t_down;
      do {
        t_up = ev.uniform(cfg.oltc_transition_min_s, cfg.oltc_transition_max_s);
        dwell = ev.uniform(cfg.oltc_dwell_min_s, cfg.oltc_dwell_max_s);
        t_down = ev.uniform(cfg.oltc_transition_min_s, cfg.oltc_transition_max_s);
      } while (te + t_up + dwell + t_down > window_end);
      const double v0 = pre.v_mag;
      const double v1 = v0 + sign * cfg.tap_step_v;  // dislocated tap level
      fill([&](double t) {
        PhasorSample s = detail::sample_at(t, pre);
        if (t < te) return s;
        const double u1 = te + t_up, u2 = u1 + dwell, u3 = u2 + t_down;
        if (t < u1)
          s.v_mag = v0 + (v1 - v0) * (t - te) / t_up;
        else if (t < u2)
          s.v_mag = v1;
        else if (t < u3)
          s.v_mag = v1 + (v0 - v1) * (t - u2) / t_down;
        return s;
      });
      break;
    }
    case EventClass::AbruptLoadChange: {
      if (te > window_end)
        throw std::invalid_argument("load step lands after the last sample");
      const double i_post = i_pre * (1.0 + *scenario.load_step_fraction);
      const SteadyState post = solve_steady(cfg, i_post);
      fill([&](double t) {
        return t < te ? detail::sample_at(t, pre) : detail::sample_at(t, post);
      });
      break;
    }
  }
  return add_noise(rec, cfg.noise_std_fraction, mix_seed(seed, 0x0153ull));
}

// The full 450-experiment grid: classes 1-2 sweep 15 loads x 10 loading
// levels (50%..95%), class 3 sweeps 15 loads x 10 signed steps (5%..25%
// up or down). Event times are drawn per record from U[0.2, 0.6].
inline Dataset build_dataset(const GeneratorConfig& cfg) {
  validate_config(cfg);
  Dataset ds;
  ds.sps = cfg.sps;
  ds.records.reserve(450);
  const auto event_time_for = [](std::uint64_t seed) {
    Rng rng(mix_seed(seed, 0x7131ull));
    return rng.uniform(0.2, 0.6);
  };
  for (EventClass cls : {EventClass::CapacitorSwitch, EventClass::OltcSwitch}) {
    for (int li = 0; li < 15; ++li) {
      for (int lv = 0; lv < 10; ++lv) {
        const std::uint64_t seed =
            mix_seed(cfg.master_seed, static_cast<std::uint64_t>(class_code(cls)),
                     static_cast<std::uint64_t>(li), static_cast<std::uint64_t>(lv));
        ScenarioParams sc;
        sc.load_index = li;
        sc.loading_fraction = 0.50 + 0.05 * lv;
        sc.event_time = event_time_for(seed);
        ds.records.push_back(synth_record(cls, sc, cfg, seed));
      }
    }
  }
  for (int li = 0; li < 15; ++li) {
    for (int si = 0; si < 10; ++si) {
      const std::uint64_t seed = mix_seed(cfg.master_seed, 3ull,
                                          static_cast<std::uint64_t>(li),
                                          static_cast<std::uint64_t>(si));
      ScenarioParams sc;
      sc.load_index = li;
      // -25%..-5%, then +5%..+25%
      sc.load_step_fraction = si < 5 ? -0.25 + 0.05 * si : 0.05 * (si - 4);
      sc.event_time = event_time_for(seed);
      ds.records.push_back(synth_record(EventClass::AbruptLoadChange, sc, cfg, seed));
    }
  }
  return ds;
}

// Flat key=value config file mirroring GeneratorConfig field names;
// '#' starts a comment. Unknown keys are rejected.
inline GeneratorConfig parse_generator_config(std::istream& in,
                                              GeneratorConfig base = GeneratorConfig{}) {
  std::map<std::string, std::string> kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
    };
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": expected key = value");
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  const auto take = [&kv](const std::string& key, auto& field) {
    const auto it = kv.find(key);
    if (it == kv.end()) return;
    std::istringstream ss(it->second);
    ss >> field;
    if (ss.fail() || !(ss >> std::ws).eof())
      throw std::invalid_argument("config value for '" + key + "' is not a number");
    kv.erase(it);
  };
  take("sps", base.sps);
  take("thevenin_source", base.thevenin_source);
  take("thevenin_impedance_mag", base.thevenin_impedance_mag);
  take("thevenin_impedance_ang_deg", base.thevenin_impedance_ang_deg);
  take("base_load_current", base.base_load_current);
  take("cap_step_v", base.cap_step_v);
  take("cap_transition_s", base.cap_transition_s);
  take("tap_step_v", base.tap_step_v);
  take("oltc_transition_min_s", base.oltc_transition_min_s);
  take("oltc_transition_max_s", base.oltc_transition_max_s);
  take("oltc_dwell_min_s", base.oltc_dwell_min_s);
  take("oltc_dwell_max_s", base.oltc_dwell_max_s);
  take("noise_std_fraction", base.noise_std_fraction);
  take("master_seed", base.master_seed);
  if (!kv.empty())
    throw std::invalid_argument("unknown config key '" + kv.begin()->first + "'");
  validate_config(base);
  return base;
}

inline GeneratorConfig load_generator_config(const std::filesystem::path& path,
                                             GeneratorConfig base = GeneratorConfig{}) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config: " + path.string());
  return parse_generator_config(in, base);
}

}  // namespace pmuevent
