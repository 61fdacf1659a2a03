// Dataset file I/O: newline-delimited JSON, one flat object per record,
// preceded by a one-line header {"schema_version":1,...}. Doubles survive
// the round trip bit-exactly (shortest round-trip rendering).
#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "pmuevent/phasor.hpp"

namespace pmuevent {

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr int kDatasetSchemaVersion = 1;

// Writes content to a temporary sibling, then renames over the target.
inline void atomic_write_file(const std::filesystem::path& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + tmp.string());
    out << content;
    if (!out.flush()) throw IoError("short write: " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp.string() + " -> " + path.string());
}

inline nlohmann::json record_to_json(const EventRecord& r) {
  nlohmann::json j;
  j["label"] = class_code(r.label);
  j["sps"] = r.sps;
  j["seed"] = r.seed;
  j["load_index"] = r.scenario.load_index;
  if (r.scenario.loading_fraction) j["loading_fraction"] = *r.scenario.loading_fraction;
  if (r.scenario.load_step_fraction) j["load_step_fraction"] = *r.scenario.load_step_fraction;
  j["event_time"] = r.scenario.event_time;
  std::vector<double> vm, va, im, ia;
  vm.reserve(r.samples.size());
  va.reserve(r.samples.size());
  im.reserve(r.samples.size());
  ia.reserve(r.samples.size());
  for (const auto& s : r.samples) {
    vm.push_back(s.v_mag);
    va.push_back(s.v_ang);
    im.push_back(s.i_mag);
    ia.push_back(s.i_ang);
  }
  j["v_mag"] = vm;
  j["v_ang"] = va;
  j["i_mag"] = im;
  j["i_ang"] = ia;
  return j;
}

inline EventRecord record_from_json(const nlohmann::json& j) {
  EventRecord r;
  r.label = class_from_code(j.at("label").get<int>());
  r.sps = j.at("sps").get<int>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.scenario.load_index = j.at("load_index").get<int>();
  if (j.contains("loading_fraction"))
    r.scenario.loading_fraction = j.at("loading_fraction").get<double>();
  if (j.contains("load_step_fraction"))
    r.scenario.load_step_fraction = j.at("load_step_fraction").get<double>();
  r.scenario.event_time = j.at("event_time").get<double>();
  const auto& vm = j.at("v_mag");
  const auto& va = j.at("v_ang");
  const auto& im = j.at("i_mag");
  const auto& ia = j.at("i_ang");
  const std::size_t n = vm.size();
  if (va.size() != n || im.size() != n || ia.size() != n)
    throw IoError("record channel arrays have mismatched lengths");
  r.samples.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    r.samples[k].t = static_cast<double>(k) / r.sps;
    r.samples[k].v_mag = vm[k].get<double>();
    r.samples[k].v_ang = va[k].get<double>();
    r.samples[k].i_mag = im[k].get<double>();
    r.samples[k].i_ang = ia[k].get<double>();
  }
  return r;
}

inline std::string dataset_to_ndjson(const Dataset& ds) {
  nlohmann::json header;
  header["schema_version"] = kDatasetSchemaVersion;
  header["sps"] = ds.sps;
  header["count"] = ds.records.size();
  std::string out = header.dump();
  out.push_back('\n');
  for (const auto& r : ds.records) {
    out += record_to_json(r).dump();
    out.push_back('\n');
  }
  return out;
}

inline void write_dataset(const Dataset& ds, const std::filesystem::path& path) {
  atomic_write_file(path, dataset_to_ndjson(ds));
}

inline Dataset dataset_from_ndjson(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw IoError("dataset file is empty");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("bad dataset header: ") + e.what());
  }
  if (!header.contains("schema_version") ||
      header["schema_version"].get<int>() != kDatasetSchemaVersion)
    throw IoError("unsupported dataset schema version");
  Dataset ds;
  ds.sps = header.at("sps").get<int>();
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      ds.records.push_back(record_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw IoError(std::string("bad dataset record: ") + e.what());
    }
    if (ds.records.back().sps != ds.sps)
      throw IoError("record sps disagrees with dataset header");
  }
  return ds;
}

inline Dataset read_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open dataset: " + path.string());
  return dataset_from_ndjson(in);
}

}  // namespace pmuevent
