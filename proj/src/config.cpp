#include "vortex/config.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>
#include <stdexcept>

namespace vortex {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

class Reader {
 public:
  Reader(const json& j, std::string section) : j_(j), section_(std::move(section)) {
    if (!j_.is_object()) fail("", "must be an object");
  }

  template <typename T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      if constexpr (std::is_same_v<T, int>) {
        if (!it->is_number_integer()) fail(key, "must be an integer");
      } else if constexpr (std::is_same_v<T, double>) {
        if (!it->is_number()) fail(key, "must be a number");
      } else if constexpr (std::is_same_v<T, bool>) {
        if (!it->is_boolean()) fail(key, "must be true or false");
      } else {
        if (!it->is_string()) fail(key, "must be a string");
      }
      out = it->get<T>();
    } catch (const json::exception& e) {
      fail(key, e.what());
    }
  }

  void finish() const {
    for (const auto& [k, v] : j_.items())
      if (!seen_.contains(k)) fail(k, "unknown key");
  }

 private:
  [[noreturn]] void fail(const std::string& key, const std::string& what) const {
    throw std::invalid_argument(section_ + (key.empty() ? "" : "." + key) + ": " + what);
  }

  const json& j_;
  std::string section_;
  std::set<std::string, std::less<>> seen_;
};

}  // namespace

void SimulationSettings::validate() const {
  auto fail = [](const char* what) { throw std::invalid_argument(std::string("simulation: ") + what); };
  if (!(lambda_nm > 0.0) || !std::isfinite(lambda_nm)) fail("lambda_nm must be positive");
  if (samples_per_period < kMinSamplesPerPeriod) fail("samples_per_period must be >= 8");
  if (padding < 1 || padding > 64) fail("padding must lie in [1, 64]");
  if (profile_bins < 8) fail("profile_bins must be >= 8");
  if (n_lambda < 2) fail("n_lambda must be >= 2");
  if (!std::isfinite(orientation_deg)) fail("orientation_deg must be finite");
  if (!(slice_max_nm > 0.0)) fail("slice_max_nm must be positive");
  if (slice_points < 2) fail("slice_points must be >= 2");
  if (stack < 1) fail("stack must be >= 1");
  if (!(fit_d_min_nm >= 0.0 && fit_d_min_nm <= fit_d_max_nm)) fail("fit range must satisfy 0 <= min <= max");
  if (fit_grid < 1) fail("fit_grid must be >= 1");
}

void RunConfig::validate() const {
  grating.validate();
  instrument.validate();
  simulation.validate();
}

ordered_json grating_to_json(const GratingSpec& s) {
  ordered_json j;
  j["period_nm"] = s.period_nm;
  j["charge"] = s.charge;
  j["depth_nm"] = s.depth_nm;
  j["duty"] = s.duty;
  j["profile"] = std::string(to_string(s.profile));
  j["trapezoid_c"] = s.trapezoid_c;
  j["plaquette_w_nm"] = s.plaquette_w_nm;
  j["plaquette_h_nm"] = s.plaquette_h_nm;
  j["hole_radius_nm"] = s.hole_radius_nm;
  j["tiles_x"] = s.tiles_x;
  j["tiles_y"] = s.tiles_y;
  j["sld_per_nm2"] = s.sld_per_nm2;
  return j;
}

GratingSpec grating_from_json(const json& j) {
  GratingSpec s;
  Reader r(j, "grating");
  r.get("period_nm", s.period_nm);
  r.get("charge", s.charge);
  r.get("depth_nm", s.depth_nm);
  r.get("duty", s.duty);
  std::string profile(to_string(s.profile));
  r.get("profile", profile);
  s.profile = profile_from_string(profile);
  r.get("trapezoid_c", s.trapezoid_c);
  r.get("plaquette_w_nm", s.plaquette_w_nm);
  r.get("plaquette_h_nm", s.plaquette_h_nm);
  r.get("hole_radius_nm", s.hole_radius_nm);
  r.get("tiles_x", s.tiles_x);
  r.get("tiles_y", s.tiles_y);
  r.get("sld_per_nm2", s.sld_per_nm2);
  r.finish();
  s.validate();
  return s;
}

ordered_json instrument_to_json(const InstrumentConfig& c) {
  ordered_json j;
  j["freq_hz"] = c.freq_hz;
  j["length_rf_m"] = c.length_rf_m;
  j["theta0_deg"] = c.theta0_rad / kDeg;
  j["xi0_per_nm"] = c.xi0_per_nm;
  j["xi0_computed_per_nm"] = c.computed_xi0();
  j["lambda_min_nm"] = c.band_nm[0];
  j["lambda_max_nm"] = c.band_nm[1];
  j["frac_resolution"] = c.frac_resolution;
  return j;
}

InstrumentConfig instrument_from_json(const json& j) {
  InstrumentConfig c;
  Reader r(j, "instrument");
  r.get("freq_hz", c.freq_hz);
  r.get("length_rf_m", c.length_rf_m);
  double theta_deg = c.theta0_rad / kDeg;
  r.get("theta0_deg", theta_deg);
  c.theta0_rad = theta_deg * kDeg;
  r.get("xi0_per_nm", c.xi0_per_nm);
  // Written by instrument_to_json for reference; never read back.
  double ignored = 0.0;
  r.get("xi0_computed_per_nm", ignored);
  r.get("lambda_min_nm", c.band_nm[0]);
  r.get("lambda_max_nm", c.band_nm[1]);
  r.get("frac_resolution", c.frac_resolution);
  r.finish();
  c.validate();
  return c;
}

ordered_json settings_to_json(const SimulationSettings& s) {
  ordered_json j;
  j["lambda_nm"] = s.lambda_nm;
  j["samples_per_period"] = s.samples_per_period;
  j["padding"] = s.padding;
  j["apodize"] = s.apodize;
  j["profile_bins"] = s.profile_bins;
  j["n_lambda"] = s.n_lambda;
  j["orientation_deg"] = s.orientation_deg;
  j["slice_max_nm"] = s.slice_max_nm;
  j["slice_points"] = s.slice_points;
  j["resolution"] = s.resolution;
  j["stack"] = s.stack;
  j["fit_d_min_nm"] = s.fit_d_min_nm;
  j["fit_d_max_nm"] = s.fit_d_max_nm;
  j["fit_grid"] = s.fit_grid;
  return j;
}

SimulationSettings settings_from_json(const json& j) {
  SimulationSettings s;
  Reader r(j, "simulation");
  r.get("lambda_nm", s.lambda_nm);
  r.get("samples_per_period", s.samples_per_period);
  r.get("padding", s.padding);
  r.get("apodize", s.apodize);
  r.get("profile_bins", s.profile_bins);
  r.get("n_lambda", s.n_lambda);
  r.get("orientation_deg", s.orientation_deg);
  r.get("slice_max_nm", s.slice_max_nm);
  r.get("slice_points", s.slice_points);
  r.get("resolution", s.resolution);
  r.get("stack", s.stack);
  r.get("fit_d_min_nm", s.fit_d_min_nm);
  r.get("fit_d_max_nm", s.fit_d_max_nm);
  r.get("fit_grid", s.fit_grid);
  r.finish();
  s.validate();
  return s;
}

ordered_json run_config_to_json(const RunConfig& cfg) {
  ordered_json j;
  j["grating"] = grating_to_json(cfg.grating);
  j["instrument"] = instrument_to_json(cfg.instrument);
  j["simulation"] = settings_to_json(cfg.simulation);
  return j;
}

RunConfig run_config_from_json(const json& j) {
  if (!j.is_object()) throw std::invalid_argument("config: top level must be an object");
  RunConfig cfg;
  for (const auto& [k, v] : j.items()) {
    if (k == "grating") cfg.grating = grating_from_json(v);
    else if (k == "instrument") cfg.instrument = instrument_from_json(v);
    else if (k == "simulation") cfg.simulation = settings_from_json(v);
    else throw std::invalid_argument("config: unknown section '" + k + "'");
  }
  cfg.validate();
  return cfg;
}

void apply_override(json& doc, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0)
    throw std::invalid_argument("override '" + std::string(assignment) + "' is not key=value");
  const std::string key(assignment.substr(0, eq));
  const std::string raw(assignment.substr(eq + 1));
  const auto dot = key.find('.');
  if (dot == std::string::npos || dot == 0 || dot + 1 == key.size() || key.find('.', dot + 1) != std::string::npos)
    throw std::invalid_argument("override key '" + key + "' must be section.key");

  json value = json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;
  if (!doc.is_object()) doc = json::object();
  doc[key.substr(0, dot)][key.substr(dot + 1)] = std::move(value);
}

json read_config_document(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return json::parse(ss.str());
  } catch (const json::parse_error& e) {
    throw std::invalid_argument("config file '" + path.string() + "': " + e.what());
  }
}

}  // namespace vortex
