#pragma once

// Structured run configuration: grating, instrument and simulation settings
// read from one JSON file, with dotted key=value overrides on top.

#include <filesystem>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "vortex/grating.hpp"
#include "vortex/instrument.hpp"

namespace vortex {

struct SimulationSettings {
  double lambda_nm = 0.4;
  int samples_per_period = 32;
  int padding = 8;
  bool apodize = false;
  int profile_bins = 16;
  int n_lambda = 96;
  double orientation_deg = 0.0;
  /// Slice mode: xi from 0 to slice_max_nm in slice_points steps.
  double slice_max_nm = 20000.0;
  int slice_points = 401;
  bool resolution = true;
  int stack = 1;
  double fit_d_min_nm = 3000.0;
  double fit_d_max_nm = 6000.0;
  int fit_grid = 31;

  void validate() const;
  bool operator==(const SimulationSettings&) const = default;
};

struct RunConfig {
  GratingSpec grating;
  InstrumentConfig instrument;
  SimulationSettings simulation;

  void validate() const;
};

nlohmann::ordered_json grating_to_json(const GratingSpec& spec);
/// Unknown keys and wrong types throw std::invalid_argument; absent keys keep
/// their defaults.
GratingSpec grating_from_json(const nlohmann::json& j);

/// theta0 is stored in degrees under theta0_deg.
nlohmann::ordered_json instrument_to_json(const InstrumentConfig& inst);
InstrumentConfig instrument_from_json(const nlohmann::json& j);

nlohmann::ordered_json settings_to_json(const SimulationSettings& s);
SimulationSettings settings_from_json(const nlohmann::json& j);

/// Sections "grating", "instrument" and "simulation"; each optional.
nlohmann::ordered_json run_config_to_json(const RunConfig& cfg);
RunConfig run_config_from_json(const nlohmann::json& j);

/// Applies "section.key=value" to a config document. The value is parsed as
/// JSON when possible and taken as a string otherwise.
void apply_override(nlohmann::json& doc, std::string_view assignment);

/// Reads and parses a config file; I/O and syntax errors throw
/// std::invalid_argument.
nlohmann::json read_config_document(const std::filesystem::path& path);

}  // namespace vortex
