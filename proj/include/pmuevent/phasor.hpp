// Core domain types: synchrophasor samples, labeled event windows, datasets.
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <vector>

namespace pmuevent {

enum class EventClass : int {
  CapacitorSwitch = 1,   // malfunctioned capacitor bank switching
  OltcSwitch = 2,        // malfunctioned regulator tap-changer switching
  AbruptLoadChange = 3,  // normal abrupt load change
};

inline constexpr std::array<EventClass, 3> kAllClasses = {
    EventClass::CapacitorSwitch, EventClass::OltcSwitch, EventClass::AbruptLoadChange};

inline constexpr int class_code(EventClass c) { return static_cast<int>(c); }

inline EventClass class_from_code(int code) {
  if (code < 1 || code > 3) throw std::invalid_argument("event class code must be 1, 2 or 3");
  return static_cast<EventClass>(code);
}

// Wraps an angle in degrees into (-180, 180].
inline double wrap_angle_deg(double a) {
  double w = std::remainder(a, 360.0);
  if (w <= -180.0) w += 360.0;
  return w;
}

// One timestamped synchrophasor reading. Magnitudes in per-unit, angles
// in degrees within (-180, 180], t in seconds from window start.
struct PhasorSample {
  double t = 0.0;
  double v_mag = 0.0;
  double v_ang = 0.0;
  double i_mag = 0.0;
  double i_ang = 0.0;
};

inline void validate_sample(const PhasorSample& s) {
  if (!(s.t >= 0.0)) throw std::invalid_argument("sample time must be >= 0");
  if (!(s.v_mag >= 0.0) || !(s.i_mag >= 0.0))
    throw std::invalid_argument("phasor magnitudes must be >= 0");
  if (!(s.v_ang > -180.0) || !(s.v_ang <= 180.0) || !(s.i_ang > -180.0) || !(s.i_ang <= 180.0))
    throw std::invalid_argument("phasor angles must lie in (-180, 180]");
}

// Scenario knobs for one experiment. Exactly one of loading_fraction
// (classes 1-2) / load_step_fraction (class 3) is set.
struct ScenarioParams {
  int load_index = 0;                        // which of the 15 loads, in [0, 14]
  std::optional<double> loading_fraction;    // aggregate loading level, e.g. 0.50..0.95
  std::optional<double> load_step_fraction;  // signed relative step, e.g. +-0.05..0.25
  double event_time = 0.5;                   // seconds, in (0, 1)
};

inline void validate_scenario(EventClass cls, const ScenarioParams& sc) {
  if (sc.load_index < 0 || sc.load_index > 14)
    throw std::invalid_argument("load_index must be in [0, 14]");
  if (!(sc.event_time > 0.0) || !(sc.event_time < 1.0))
    throw std::invalid_argument("event_time must lie in (0, 1)");
  const bool is_step = cls == EventClass::AbruptLoadChange;
  if (sc.loading_fraction.has_value() == is_step || sc.load_step_fraction.has_value() != is_step)
    throw std::invalid_argument(
        "scenario must set loading_fraction for classes 1-2 and load_step_fraction for class 3");
  if (sc.loading_fraction && !(*sc.loading_fraction > 0.0 && *sc.loading_fraction <= 1.0))
    throw std::invalid_argument("loading_fraction must lie in (0, 1]");
  if (sc.load_step_fraction) {
    const double st = *sc.load_step_fraction;
    if (!(st != 0.0) || !(std::abs(st) <= 0.5))
      throw std::invalid_argument("load_step_fraction must be nonzero with |step| <= 0.5");
  }
}

// A labeled one-second window of samples plus the scenario and seed that
// generated it; regenerable bit-exactly from (label, scenario, seed).
struct EventRecord {
  EventClass label = EventClass::CapacitorSwitch;
  int sps = 60;
  ScenarioParams scenario;
  std::uint64_t seed = 0;
  std::vector<PhasorSample> samples;
};

inline void validate_record(const EventRecord& r) {
  if (r.sps != 60 && r.sps != 120) throw std::invalid_argument("sps must be 60 or 120");
  if (r.samples.size() != static_cast<std::size_t>(r.sps))
    throw std::invalid_argument("record must hold exactly sps samples");
  validate_scenario(r.label, r.scenario);
  const double dt = 1.0 / r.sps;
  for (std::size_t k = 0; k < r.samples.size(); ++k) {
    validate_sample(r.samples[k]);
    if (std::abs(r.samples[k].t - static_cast<double>(k) * dt) > 1e-12)
      throw std::invalid_argument("samples must be spaced 1/sps seconds apart");
  }
}

struct Dataset {
  int sps = 60;
  std::vector<EventRecord> records;
};

inline std::map<EventClass, std::size_t> class_counts(const Dataset& ds) {
  std::map<EventClass, std::size_t> counts;
  for (EventClass c : kAllClasses) counts[c] = 0;
  for (const auto& r : ds.records) ++counts[r.label];
  return counts;
}

}  // namespace pmuevent
