#pragma once

#include "edmc/harness/experiment.hpp"
#include "edmc/harness/probes.hpp"
#include "edmc/solvers.hpp"
#include "edmc/types.hpp"

#include <cstdint>
#include <string>

namespace edmc::harness {

struct Measurements {
  Edm observed;  // only masked entries are meaningful
  SampleMask mask;
  double sigma = 0.0;
  double gamma = 2.0;
  double p_out = 0.0;
  double v_out = 0.5;
  std::uint64_t seed = 0;
};

Measurements measurements_of(const Instance& inst, const ExperimentSpec& spec);

std::string scene_json(const Scene& scene);
Scene scene_from_json(const std::string& text);

// Pair indices are 0-based. The CSV carries the header fields on a leading '#' line.
std::string measurements_json(const Measurements& m);
Measurements measurements_from_json(const std::string& text);
std::string measurements_csv(const Measurements& m);
Measurements measurements_from_csv(const std::string& text, Index n = -1);

std::string report_json(const TrialReport& report, bool include_points = true);
std::string error_json(const std::string& message);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& contents);

struct ConfigFile {
  ExperimentSpec experiment;
  BasinSpec basin;
  PhaseGridSpec phase_grid;
  bool has_basin = false;
  bool has_phase_grid = false;
};

// TOML experiment description; unknown keys are rejected.
ConfigFile load_config(const std::string& path);
ConfigFile parse_config(const std::string& text, const std::string& source = "config");

Scenario parse_scenario(const std::string& name);
const char* to_string(Scenario s);

}  // namespace edmc::harness
