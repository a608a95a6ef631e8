#include "vortex/depth_fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "vortex/config.hpp"
#include "vortex/error.hpp"
#include "vortex/parallel.hpp"

namespace vortex {

namespace {

constexpr std::size_t kMinFitPoints = 10;

// Model evaluator with the indicator grid computed once.
class TofModel {
 public:
  TofModel(const GratingSpec& spec, const InstrumentConfig& inst, double orientation_rad,
           std::vector<double> lambdas, int samples_per_period)
      : spec_(spec), inst_(inst), orientation_(orientation_rad), lambdas_(std::move(lambdas)) {
    spec_.tiles_x = 1;
    spec_.tiles_y = 1;
    shape_ = grid_for(spec_, samples_per_period);
    chi_ = indicator_grid(spec_, shape_.nx, shape_.ny);
  }

  SesansCurve operator()(double depth_nm) const {
    GratingSpec s = spec_;
    s.depth_nm = depth_nm;
    SesansCurve curve;
    curve.mode = SesansMode::tof;
    curve.orientation_rad = orientation_;
    curve.xi0_per_nm = inst_.xi0_per_nm;
    curve.band_nm = inst_.band_nm;
    curve.lambda_nm = lambdas_;
    for (double lambda : lambdas_) {
      const double xi = xi_of_lambda(inst_.xi0_per_nm, lambda);
      const auto pm = phase_map_from_indicator(s, lambda, shape_.nx, shape_.ny, chi_);
      const double one[] = {xi};
      curve.xi_nm.push_back(xi);
      curve.pol.push_back(polarization_along(pm, orientation_, one)[0]);
    }
    return convolve_resolution(curve, inst_.frac_resolution);
  }

 private:
  GratingSpec spec_;
  InstrumentConfig inst_;
  double orientation_;
  std::vector<double> lambdas_;
  GridShape shape_{};
  std::vector<double> chi_;
};

double sse_of(const SesansCurve& model, const std::vector<double>& data) {
  double s = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double r = model.pol[i] - data[i];
    s += r * r;
  }
  if (!std::isfinite(s)) throw NumericalError("fit_depth: non-finite objective");
  return s;
}

}  // namespace

SesansCurve depth_model(const GratingSpec& spec, const InstrumentConfig& inst, double orientation_rad,
                        const std::vector<double>& lambdas_nm, int samples_per_period) {
  inst.validate();
  return TofModel(spec, inst, orientation_rad, lambdas_nm, samples_per_period)(spec.depth_nm);
}

DepthFitResult fit_depth(const SesansCurve& measured, const GratingSpec& template_spec,
                         const InstrumentConfig& inst, double d_lo_nm, double d_hi_nm, int n_grid,
                         int samples_per_period) {
  template_spec.validate();
  inst.validate();
  if (!(d_lo_nm >= 0.0 && d_lo_nm <= d_hi_nm) || !std::isfinite(d_hi_nm))
    throw std::invalid_argument("fit_depth: depth range must satisfy 0 <= lo <= hi");
  if (n_grid < 1 || (d_hi_nm > d_lo_nm && n_grid < 2))
    throw std::invalid_argument("fit_depth: n_grid must be >= 2 for a non-degenerate range");
  if (measured.xi_nm.size() != measured.pol.size() ||
      (!measured.lambda_nm.empty() && measured.lambda_nm.size() != measured.xi_nm.size()))
    throw std::invalid_argument("fit_depth: malformed measured curve");

  // Points inside the band, in increasing wavelength.
  SesansCurve data;
  data.mode = SesansMode::tof;
  data.orientation_rad = measured.orientation_rad;
  data.xi0_per_nm = inst.xi0_per_nm;
  data.band_nm = inst.band_nm;
  for (std::size_t i = 0; i < measured.xi_nm.size(); ++i) {
    if (!std::isfinite(measured.pol[i]) || !std::isfinite(measured.xi_nm[i])) continue;
    const double lambda = measured.lambda_nm.empty() ? lambda_of_xi(inst.xi0_per_nm, std::max(0.0, measured.xi_nm[i]))
                                                     : measured.lambda_nm[i];
    if (!(lambda >= inst.band_nm[0] && lambda <= inst.band_nm[1])) continue;
    data.lambda_nm.push_back(lambda);
    data.xi_nm.push_back(measured.xi_nm[i]);
    data.pol.push_back(measured.pol[i]);
  }
  if (data.pol.size() < kMinFitPoints)
    throw std::invalid_argument("fit_depth: fewer than 10 measured points inside the simulated band");
  for (std::size_t i = 1; i < data.lambda_nm.size(); ++i)
    if (!(data.lambda_nm[i] > data.lambda_nm[i - 1]))
      throw std::invalid_argument("fit_depth: measured wavelengths must be strictly increasing");

  const TofModel model(template_spec, inst, measured.orientation_rad, data.lambda_nm, samples_per_period);

  DepthFitResult res;
  res.points_used = data.pol.size();
  res.instrument = inst;
  res.grid.resize(static_cast<std::size_t>(n_grid));
  parallel_for(res.grid.size(), [&](std::size_t i) {
    const double d = n_grid == 1 ? d_lo_nm : d_lo_nm + (d_hi_nm - d_lo_nm) * static_cast<double>(i) / (n_grid - 1);
    res.grid[i] = {d, sse_of(model(d), data.pol)};
  });

  std::size_t best = 0;
  for (std::size_t i = 1; i < res.grid.size(); ++i)
    if (res.grid[i].sse < res.grid[best].sse) best = i;
  double d_best = res.grid[best].d_nm;
  double sse_best = res.grid[best].sse;

  if (n_grid > 1) {
    const double lo0 = res.grid[best == 0 ? 0 : best - 1].d_nm;
    const double hi0 = res.grid[std::min(best + 1, res.grid.size() - 1)].d_nm;
    const double g = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = lo0, b = hi0;
    double c = b - g * (b - a), d = a + g * (b - a);
    double fc = sse_of(model(c), data.pol), fd = sse_of(model(d), data.pol);
    while (b - a > 0.5) {
      if (fc < fd) {
        b = d;
        d = c;
        fd = fc;
        c = b - g * (b - a);
        fc = sse_of(model(c), data.pol);
      } else {
        a = c;
        c = d;
        fc = fd;
        d = a + g * (b - a);
        fd = sse_of(model(d), data.pol);
      }
    }
    const double x = fc < fd ? c : d;
    const double fx = std::min(fc, fd);
    if (fx < sse_best) {
      d_best = x;
      sse_best = fx;
    }
  }

  double smax = 0.0, smin = std::numeric_limits<double>::infinity();
  for (const auto& p : res.grid) {
    smax = std::max(smax, p.sse);
    smin = std::min(smin, p.sse);
  }
  res.flat_objective = n_grid > 1 && smax - smin <= 1e-9 * std::max(smax, 1e-300);
  double contrast = 0.0;
  for (double p : data.pol) contrast = std::max(contrast, std::abs(1.0 - p));
  res.contrast_free = contrast < 1e-6;

  res.d_best_nm = d_best;
  res.sse = sse_best;
  res.spec = template_spec;
  res.spec.depth_nm = d_best;
  res.best_model = model(d_best);
  res.data_used = std::move(data);
  return res;
}

std::string fit_report_json(const DepthFitResult& r) {
  nlohmann::ordered_json j;
  j["d_best_nm"] = r.d_best_nm;
  j["sse"] = r.sse;
  j["points_used"] = r.points_used;
  j["flat_objective"] = r.flat_objective;
  j["contrast_free"] = r.contrast_free;
  auto grid = nlohmann::ordered_json::array();
  for (const auto& p : r.grid) grid.push_back({{"d_nm", p.d_nm}, {"sse", p.sse}});
  j["grid"] = std::move(grid);
  j["orientation_deg"] = r.best_model.orientation_rad * 180.0 / std::numbers::pi;
  j["spec"] = grating_to_json(r.spec);
  j["instrument"] = instrument_to_json(r.instrument);
  return j.dump(2) + "\n";
}

}  // namespace vortex
