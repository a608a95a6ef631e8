#include "cli.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "vortex/config.hpp"
#include "vortex/depth_fit.hpp"
#include "vortex/diffraction.hpp"
#include "vortex/error.hpp"
#include "vortex/export.hpp"
#include "vortex/sesans.hpp"
#include "vortex/specfun.hpp"

namespace vortex::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using std::numbers::pi;

namespace {

constexpr double kDeg = pi / 180.0;

struct CommonOptions {
  std::string config_path;
  std::string out_dir = ".";
  std::vector<std::string> overrides;
};

struct Context {
  CommonOptions common;
  RunConfig cfg;
  fs::path out;
  std::vector<std::string> outputs;
  std::vector<HashedInput> inputs;
  std::ostream* log = nullptr;

  template <typename Writer>
  void emit(const std::string& name, Writer&& write) {
    std::ostringstream os;
    write(os);
    const auto path = out / name;
    write_file_atomic(path, os.str());
    outputs.push_back(path.string());
  }
  void emit_text(const std::string& name, const std::string& text) {
    emit(name, [&](std::ostream& os) { os << text; });
  }
};

void add_common(CLI::App* sub, CommonOptions& c) {
  sub->add_option("--config", c.config_path, "JSON config file (sections grating, instrument, simulation)");
  sub->add_option("--out", c.out_dir, "Output directory")->capture_default_str();
  sub->add_option("--set", c.overrides, "Override section.key=value; applied after the config file")
      ->allow_extra_args(false);
}

void load_config(Context& ctx, const std::vector<std::string>& extra_overrides) {
  nlohmann::json doc = nlohmann::json::object();
  if (!ctx.common.config_path.empty()) {
    doc = read_config_document(ctx.common.config_path);
    ctx.inputs.push_back({"config", ctx.common.config_path});
  }
  for (const auto& o : ctx.common.overrides) apply_override(doc, o);
  for (const auto& o : extra_overrides) apply_override(doc, o);
  ctx.cfg = run_config_from_json(doc);

  ctx.out = ctx.common.out_dir;
  std::error_code ec;
  fs::create_directories(ctx.out, ec);
  if (ec || !fs::is_directory(ctx.out))
    throw IoError("cannot create output directory '" + ctx.out.string() + "'");
}

std::string order_tag(int n, int side) {
  return "n" + std::to_string(n) + (side > 0 ? "_plus" : "_minus");
}

ordered_json nullable(std::optional<double> v) { return v ? ordered_json(*v) : ordered_json(nullptr); }

// ---- diffract ------------------------------------------------------------

void cmd_diffract(Context& ctx) {
  const auto& spec = ctx.cfg.grating;
  const auto& sim = ctx.cfg.simulation;
  const auto shape = grid_for(spec, sim.samples_per_period);
  const auto pm = phase_map(spec, sim.lambda_nm, shape.nx, shape.ny);
  const auto dp = diffraction_pattern(pm, {sim.padding, sim.apodize});

  ctx.emit("pattern.grid", [&](std::ostream& os) { write_grid(os, dp); });

  ordered_json summary;
  summary["nx"] = dp.nx;
  summary["ny"] = dp.ny;
  summary["dqx_per_nm"] = dp.dqx;
  summary["dqy_per_nm"] = dp.dqy;
  summary["lambda_nm"] = dp.lambda_nm;
  summary["parseval_residual"] = parseval_residual(dp);
  summary["transmitted_abs"] = std::abs(transmitted_amplitude(spec.sld_per_nm2, sim.lambda_nm, spec.depth_nm));
  auto orders = ordered_json::array();
  for (int n : {1, 3}) {
    for (int side : {1, -1}) {
      ordered_json o;
      o["n"] = n;
      o["side"] = side;
      o["center_qx_per_nm"] = side * 2.0 * pi * n / spec.period_nm;
      try {
        const auto prof = radial_profile(dp, n, side, sim.profile_bins);
        const auto name = "profile_" + order_tag(n, side) + ".csv";
        ctx.emit(name, [&](std::ostream& os) { write_csv(os, prof); });
        const auto r = donut_peak_radius(prof);
        o["profile"] = name;
        o["donut"] = r.has_value();
        o["peak_radius_per_nm"] = nullable(r);
        o["annulus_integral"] = annulus_integral(dp, n, side);
        o["empty_bins"] = prof.has_empty_bins();
      } catch (const std::invalid_argument& e) {
        o["skipped"] = e.what();
      }
      orders.push_back(std::move(o));
    }
  }
  summary["orders"] = std::move(orders);
  summary["grating"] = grating_to_json(spec);
  summary["simulation"] = settings_to_json(sim);
  ctx.emit_text("diffract_summary.json", summary.dump(2) + "\n");
}

// ---- sesans --------------------------------------------------------------

void emit_curve(Context& ctx, const std::string& stem, const SesansCurve& curve, const GratingSpec& spec) {
  ctx.emit(stem + ".csv", [&](std::ostream& os) { write_csv(os, curve); });
  ctx.emit_text(stem + ".json", curve_sidecar_json(curve, spec, ctx.cfg.instrument));
}

void cmd_sesans(Context& ctx, const std::string& mode) {
  const auto& spec = ctx.cfg.grating;
  const auto& sim = ctx.cfg.simulation;
  const auto& inst = ctx.cfg.instrument;
  const double theta = sim.orientation_deg * kDeg;

  if (mode == "map") {
    if (sim.stack != 1) throw std::invalid_argument("sesans: --stack applies to slice and tof modes only");
    const auto shape = grid_for(spec, sim.samples_per_period);
    const auto map = polarization_map(phase_map(spec, sim.lambda_nm, shape.nx, shape.ny));
    ctx.emit("sesans_map.csv", [&](std::ostream& os) { write_csv(os, map); });
    ordered_json side;
    side["mode"] = "map";
    side["lambda_nm"] = map.lambda_nm;
    side["nx"] = map.nx;
    side["ny"] = map.ny;
    side["dxi_x_nm"] = map.dxi_x;
    side["dxi_y_nm"] = map.dxi_y;
    side["grating"] = grating_to_json(spec);
    side["instrument"] = instrument_to_json(inst);
    ctx.emit_text("sesans_map.json", side.dump(2) + "\n");
    return;
  }

  std::vector<SesansCurve> raw;  // [single, stacked..., equivalent single]
  std::string stem;
  auto make = [&](const GratingSpec& s) {
    if (mode == "slice") {
      std::vector<double> xi(sim.slice_points);
      for (int i = 0; i < sim.slice_points; ++i) xi[i] = sim.slice_max_nm * i / (sim.slice_points - 1);
      return monochromatic_curve(s, sim.lambda_nm, theta, xi, sim.samples_per_period);
    }
    return tof_curve(s, inst, theta, sim.n_lambda, sim.samples_per_period);
  };
  if (mode == "slice") stem = "sesans_slice";
  else if (mode == "tof") stem = "sesans_tof";
  else throw std::invalid_argument("sesans: unknown mode '" + mode + "'");

  // Resolution smearing applies to time-of-flight curves only.
  const bool smear = mode == "tof" && sim.resolution;
  auto finish = [&](const SesansCurve& c) { return smear ? convolve_resolution(c, inst.frac_resolution) : c; };

  const auto single = make(spec);
  emit_curve(ctx, stem, finish(single), spec);
  if (sim.stack > 1) {
    const std::vector<SesansCurve> copies(static_cast<std::size_t>(sim.stack), single);
    const auto tag = std::to_string(sim.stack);
    emit_curve(ctx, stem + "_stack" + tag, finish(stack_product(copies)), spec);
    GratingSpec equiv = spec;
    equiv.depth_nm = equivalent_stack_depth(spec.depth_nm, sim.stack);
    emit_curve(ctx, stem + "_equiv" + tag, finish(make(equiv)), equiv);
  }
}

// ---- fit -----------------------------------------------------------------

struct ColumnMap {
  std::string xi = "xi_nm";
  std::string pol = "pol";
  std::string lambda = "lambda_nm";
  bool lambda_explicit = false;
};

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r\"");
    const auto e = cell.find_last_not_of(" \t\r\"");
    out.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::optional<double> parse_number(const std::string& s) {
  double v = 0.0;
  const auto* first = s.data();
  if (!s.empty() && s[0] == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

SesansCurve read_measured(const fs::path& path, const ColumnMap& cols) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open data file '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line) || line.find_first_not_of(" \t\r") == std::string::npos)
    throw std::invalid_argument("data file '" + path.string() + "' is empty");
  if (line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
  const auto header = split_csv_line(line);
  auto index_of = [&](const std::string& name) -> std::optional<std::size_t> {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) return std::nullopt;
    return static_cast<std::size_t>(it - header.begin());
  };
  const auto ix = index_of(cols.xi);
  const auto ip = index_of(cols.pol);
  const auto il = index_of(cols.lambda);
  if (!ix || !ip) throw std::invalid_argument("data file lacks column '" + (ix ? cols.pol : cols.xi) + "'");
  if (cols.lambda_explicit && !il) throw std::invalid_argument("data file lacks column '" + cols.lambda + "'");

  SesansCurve c;
  c.mode = SesansMode::tof;
  bool all_lambda = il.has_value();
  std::vector<double> lambdas;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split_csv_line(line);
    auto cell = [&](std::size_t i) { return i < cells.size() ? parse_number(cells[i]) : std::nullopt; };
    const auto xi = cell(*ix);
    const auto pol = cell(*ip);
    if (!xi || !pol) continue;
    c.xi_nm.push_back(*xi);
    c.pol.push_back(*pol);
    if (il) {
      const auto l = cell(*il);
      if (l) lambdas.push_back(*l);
      else all_lambda = false;
    }
  }
  if (all_lambda) c.lambda_nm = std::move(lambdas);
  if (c.xi_nm.size() < 10)
    throw std::invalid_argument("data file '" + path.string() + "' has fewer than 10 usable rows");
  return c;
}

void cmd_fit(Context& ctx, const std::string& data_path, const ColumnMap& cols) {
  if (data_path.empty()) throw std::invalid_argument("fit: --data is required");
  ctx.inputs.push_back({"data", data_path});
  auto measured = read_measured(data_path, cols);
  const auto& sim = ctx.cfg.simulation;
  measured.orientation_rad = sim.orientation_deg * kDeg;

  const auto res = fit_depth(measured, ctx.cfg.grating, ctx.cfg.instrument, sim.fit_d_min_nm, sim.fit_d_max_nm,
                             sim.fit_grid, sim.samples_per_period);
  ctx.emit_text("fit_report.json", fit_report_json(res));
  ctx.emit("fit_overlay.csv", [&](std::ostream& os) {
    os << "xi_nm,lambda_nm,pol_data,pol_model\n";
    for (std::size_t i = 0; i < res.data_used.pol.size(); ++i)
      os << format_double(res.data_used.xi_nm[i]) << ',' << format_double(res.data_used.lambda_nm[i]) << ','
         << format_double(res.data_used.pol[i]) << ',' << format_double(res.best_model.pol[i]) << '\n';
  });
  if (res.flat_objective) *ctx.log << "warning: objective is flat over the depth range\n";
  if (res.contrast_free) *ctx.log << "warning: measured curve carries no polarization contrast\n";
  *ctx.log << "d_best_nm " << format_double(res.d_best_nm) << " sse " << format_double(res.sse) << '\n';
}

// ---- donut ---------------------------------------------------------------

struct DonutOptions {
  int n = 1;
  int side = 1;
  double regulator_nm = 0.0;
  int points = 200;
  double q_max = 0.0;
};

void cmd_donut(Context& ctx, const DonutOptions& opt) {
  const auto& spec = ctx.cfg.grating;
  const auto& sim = ctx.cfg.simulation;
  if (opt.points < 2) throw std::invalid_argument("donut: --points must be >= 2");
  DonutParams p;
  p.order_n = opt.n;
  p.charge_m = spec.charge;
  p.side = opt.side;
  p.regulator_R = opt.regulator_nm > 0.0 ? opt.regulator_nm
                                         : std::min(spec.plaquette_w_nm, spec.plaquette_h_nm) / std::sqrt(pi);
  p.lambda_nm = sim.lambda_nm;
  p.contrast = std::polar(1.0, -spec.phase_contrast(sim.lambda_nm)) - 1.0;
  const double q_max = opt.q_max > 0.0 ? opt.q_max : pi / spec.period_nm;
  std::vector<double> q(opt.points);
  for (int i = 0; i < opt.points; ++i) q[i] = q_max * i / (opt.points - 1);

  const auto warn = regulator_warning(p.regulator_R, spec.period_nm, std::abs(opt.n * spec.charge));
  if (!warn.empty()) *ctx.log << "warning: " << warn << '\n';
  const auto prof = donut_profile(p, q);
  const auto name = "donut_n" + std::to_string(opt.n) + "_m" + std::to_string(spec.charge) + ".csv";
  ctx.emit(name, [&](std::ostream& os) { write_csv(os, prof); });
}

// ---- xi ------------------------------------------------------------------

void cmd_xi(Context& ctx, const std::vector<double>& lambdas) {
  const auto& inst = ctx.cfg.instrument;
  const auto& sim = ctx.cfg.simulation;
  const double computed = inst.computed_xi0();
  ordered_json j;
  j["xi0_per_nm"] = inst.xi0_per_nm;
  j["xi0_computed_per_nm"] = computed;
  j["relative_difference"] = (computed - inst.xi0_per_nm) / inst.xi0_per_nm;
  j["band_nm"] = {inst.band_nm[0], inst.band_nm[1]};
  j["xi_range_nm"] = {xi_of_lambda(inst.xi0_per_nm, inst.band_nm[0]), xi_of_lambda(inst.xi0_per_nm, inst.band_nm[1])};
  auto pts = ordered_json::array();
  for (double l : lambdas) pts.push_back({{"lambda_nm", l}, {"xi_nm", xi_of_lambda(inst.xi0_per_nm, l)}});
  j["points"] = std::move(pts);
  ctx.emit_text("xi.json", j.dump(2) + "\n");
  ctx.emit("xi_table.csv", [&](std::ostream& os) {
    os << "lambda_nm,xi_nm\n";
    for (int i = 0; i < sim.n_lambda; ++i) {
      const double l = inst.band_nm[0] + (inst.band_nm[1] - inst.band_nm[0]) * i / (sim.n_lambda - 1);
      os << format_double(l) << ',' << format_double(xi_of_lambda(inst.xi0_per_nm, l)) << '\n';
    }
  });
  *ctx.log << j.dump() << '\n';
}

void report_error(std::ostream& err, int code, const char* kind, const std::string& message) {
  ordered_json j;
  j["error"] = {{"exit_code", code}, {"type", kind}, {"message", message}};
  err << j.dump() << '\n';
}

std::string join(const std::vector<std::string>& args) {
  std::string s = "vortex";
  for (const auto& a : args) s += ' ' + a;
  return s;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  const auto t0 = std::chrono::steady_clock::now();
  CLI::App app{"Forked phase grating diffraction and SESANS toolkit", "vortex"};
  app.require_subcommand(1);
  app.set_version_flag("--version", toolkit_version());

  Context ctx;
  ctx.log = &out;
  std::string mode = "tof";
  std::optional<double> orientation;
  std::optional<std::string> resolution;
  std::optional<int> stack;
  std::string data_path;
  ColumnMap cols;
  DonutOptions donut;
  std::vector<double> xi_lambdas;

  auto* diffract = app.add_subcommand("diffract", "Far-field pattern, order profiles for n = 1, 3");
  auto* sesans = app.add_subcommand("sesans", "SESANS polarization map, slice or time-of-flight curve");
  auto* fit = app.add_subcommand("fit", "Fit the groove depth to a measured time-of-flight curve");
  auto* donut_cmd = app.add_subcommand("donut", "Analytic Bragg-donut radial profile");
  auto* xi = app.add_subcommand("xi", "Entanglement length calculator");
  for (auto* sub : {diffract, sesans, fit, donut_cmd, xi}) add_common(sub, ctx.common);

  sesans->add_option("--mode", mode, "map | slice | tof")
      ->check(CLI::IsMember({"map", "slice", "tof"}))
      ->capture_default_str();
  for (auto* sub : {sesans, fit}) sub->add_option("--orientation", orientation, "Encoding direction, degrees");
  sesans->add_option("--resolution", resolution, "on | off")->check(CLI::IsMember({"on", "off"}));
  sesans->add_option("--stack", stack, "Number of stacked gratings")->check(CLI::PositiveNumber);
  fit->add_option("--data", data_path, "Measured curve CSV");
  fit->add_option("--xi-col", cols.xi, "Column holding xi in nm")->capture_default_str();
  fit->add_option("--pol-col", cols.pol, "Column holding the polarization")->capture_default_str();
  auto* lambda_opt = fit->add_option("--lambda-col", cols.lambda, "Column holding lambda in nm")->capture_default_str();
  donut_cmd->add_option("--n", donut.n, "Diffraction order")->capture_default_str();
  donut_cmd->add_option("--side", donut.side, "+1 or -1")->check(CLI::IsMember({1, -1}));
  donut_cmd->add_option("--R", donut.regulator_nm, "Regulator radius in nm (default: equal-area disc of the plaquette)");
  donut_cmd->add_option("--points", donut.points, "Number of q' samples")->capture_default_str();
  donut_cmd->add_option("--qmax", donut.q_max, "Largest q' in nm^-1 (default: pi / period)");
  xi->add_option("--lambda", xi_lambdas, "Wavelengths in nm to convert");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::CallForVersion&) {
    out << toolkit_version() << '\n';
    return kOk;
  } catch (const CLI::ParseError& e) {
    report_error(err, kUserError, "usage", e.what());
    return kUserError;
  }

  auto* sub = app.get_subcommands().front();
  std::vector<std::string> flag_overrides;
  if (orientation) flag_overrides.push_back("simulation.orientation_deg=" + format_double(*orientation));
  if (resolution) flag_overrides.push_back(std::string("simulation.resolution=") + (*resolution == "on" ? "true" : "false"));
  if (stack) flag_overrides.push_back("simulation.stack=" + std::to_string(*stack));
  cols.lambda_explicit = lambda_opt->count() > 0;

  try {
    load_config(ctx, flag_overrides);
    if (sub == diffract) cmd_diffract(ctx);
    else if (sub == sesans) cmd_sesans(ctx, mode);
    else if (sub == fit) cmd_fit(ctx, data_path, cols);
    else if (sub == donut_cmd) cmd_donut(ctx, donut);
    else cmd_xi(ctx, xi_lambdas);

    RunManifest m;
    m.command = join(args);
    m.config_path = ctx.common.config_path;
    m.outputs = ctx.outputs;
    m.toolkit_version = toolkit_version();
    m.content_hash = content_hash(ctx.inputs);
    m.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_file_atomic(ctx.out / "manifest.json", manifest_json(m));
  } catch (const std::invalid_argument& e) {
    report_error(err, kUserError, "config", e.what());
    return kUserError;
  } catch (const IoError& e) {
    report_error(err, kUserError, "io", e.what());
    return kUserError;
  } catch (const std::filesystem::filesystem_error& e) {
    report_error(err, kUserError, "io", e.what());
    return kUserError;
  } catch (const NumericalError& e) {
    report_error(err, kNumericalError, "numerical", e.what());
    return kNumericalError;
  } catch (const std::exception& e) {
    report_error(err, kNumericalError, "internal", e.what());
    return kNumericalError;
  }
  return kOk;
}

}  // namespace vortex::cli
