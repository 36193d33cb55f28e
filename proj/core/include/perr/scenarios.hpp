#pragma once

#include <cstdint>
#include <istream>
#include <string>
#include <vector>

#include "perr/simulation.hpp"

namespace perr {

/// Named scenarios: the estimator comparison grid (t1-*), the EDT grid (edt-*) and the
/// sensitivity variants s1-* .. s11-*.
const std::vector<ScenarioSpec>& scenario_presets();

struct PresetGroup {
  std::string name;
  std::string description;
  std::vector<std::string> members;
};
const std::vector<PresetGroup>& preset_groups();

/// A preset name or a group name; throws DataError listing what exists.
std::vector<ScenarioSpec> resolve_scenario(const std::string& name);

/// Flat `key = value` text, one field per line, `#` comments. Writing then
/// parsing yields the same spec.
std::string write_scenario_config(const ScenarioSpec& spec);
ScenarioSpec parse_scenario_config(std::istream& in, const std::string& source_name,
                                   const ScenarioSpec& base = {});

/// 64-bit FNV-1a, used to fingerprint configs and inputs in reports.
std::uint64_t fnv1a64(const std::string& bytes, std::uint64_t h = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t v);

}  // namespace perr
