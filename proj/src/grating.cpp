#include "vortex/grating.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace vortex {

using std::numbers::pi;

std::string_view to_string(GrooveProfile profile) {
  switch (profile) {
    case GrooveProfile::rectangular: return "rectangular";
    case GrooveProfile::triangular: return "triangular";
    case GrooveProfile::trapezoidal: return "trapezoidal";
  }
  return "rectangular";
}

GrooveProfile profile_from_string(std::string_view name) {
  if (name == "rectangular") return GrooveProfile::rectangular;
  if (name == "triangular") return GrooveProfile::triangular;
  if (name == "trapezoidal") return GrooveProfile::trapezoidal;
  throw std::invalid_argument("unknown groove profile '" + std::string(name) + "'");
}

void GratingSpec::validate() const {
  auto fail = [](const std::string& what) { throw std::invalid_argument("GratingSpec: " + what); };
  if (!(period_nm > 0.0) || !std::isfinite(period_nm)) fail("period_nm must be positive");
  if (!(depth_nm >= 0.0) || !std::isfinite(depth_nm)) fail("depth_nm must be non-negative");
  if (!(duty > 0.0 && duty < 1.0)) fail("duty must lie in (0, 1)");
  if (!(trapezoid_c >= 1.0) || !std::isfinite(trapezoid_c)) fail("trapezoid_c must be >= 1");
  if (!(plaquette_w_nm > 0.0) || !(plaquette_h_nm > 0.0) || !std::isfinite(plaquette_w_nm) ||
      !std::isfinite(plaquette_h_nm))
    fail("plaquette dimensions must be positive");
  if (!(hole_radius_nm >= 0.0)) fail("hole_radius_nm must be non-negative");
  if (!(hole_radius_nm < 0.5 * std::min(plaquette_w_nm, plaquette_h_nm)))
    fail("hole_radius_nm must be smaller than half the plaquette");
  if (tiles_x < 1 || tiles_y < 1) fail("tile counts must be positive");
  if (!std::isfinite(sld_per_nm2)) fail("sld_per_nm2 must be finite");
}

double azimuthal_arg(double x, double y, double period_nm, int charge) {
  const double phi = (x == 0.0 && y == 0.0) ? 0.0 : std::atan2(y, x);
  return 2.0 * pi / period_nm * x - charge * phi;
}

namespace {

// |alpha| folded into [0, pi]; equals arccos(cos alpha) without the
// precision loss of the round trip.
double folded(double alpha) { return std::abs(std::remainder(alpha, 2.0 * pi)); }

}  // namespace

double indicator(const GratingSpec& spec, double x, double y) {
  if (spec.hole_radius_nm > 0.0 && x * x + y * y < spec.hole_radius_nm * spec.hole_radius_nm)
    return 1.0;

  const double w = folded(azimuthal_arg(x, y, spec.period_nm, spec.charge));
  switch (spec.profile) {
    case GrooveProfile::rectangular:
      // cos(alpha) > cos(pi duty)
      return w < pi * spec.duty ? 1.0 : 0.0;
    case GrooveProfile::triangular:
      return std::max(0.0, 1.0 - 2.0 / pi * w);
    case GrooveProfile::trapezoidal:
      return std::min(1.0, spec.trapezoid_c * std::max(0.0, 1.0 - 2.0 / pi * w));
  }
  return 0.0;
}

double fourier_weight(int n) {
  if (n < 1) throw std::invalid_argument("fourier_weight: order must be >= 1");
  if (n % 2 == 0) return 0.0;
  const double sign = ((n - 1) / 2) % 2 == 0 ? 1.0 : -1.0;
  return sign * 2.0 / (n * pi);
}

GridShape grid_for(const GratingSpec& spec, int samples_per_period) {
  spec.validate();
  if (samples_per_period < 1) throw std::invalid_argument("grid_for: samples_per_period < 1");
  auto cells = [&](double tile_len) {
    return std::max(1, static_cast<int>(std::lround(tile_len / spec.period_nm * samples_per_period)));
  };
  return {cells(spec.plaquette_w_nm) * spec.tiles_x, cells(spec.plaquette_h_nm) * spec.tiles_y};
}

namespace {

void check_grid(const GratingSpec& spec, int nx, int ny) {
  spec.validate();
  if (nx < 2 || ny < 2) throw std::invalid_argument("phase_map: grid must be at least 2x2");
  if (nx % spec.tiles_x != 0 || ny % spec.tiles_y != 0)
    throw std::invalid_argument("phase_map: grid dimensions must be multiples of the tile counts");
  const double dx = spec.plaquette_w_nm / (nx / spec.tiles_x);
  const double dy = spec.plaquette_h_nm / (ny / spec.tiles_y);
  const double max_step = spec.period_nm / kMinSamplesPerPeriod;
  if (dx > max_step || dy > max_step)
    throw std::invalid_argument("phase_map: fewer than 8 samples per grating period");
}

}  // namespace

std::vector<double> indicator_grid(const GratingSpec& spec, int nx, int ny) {
  check_grid(spec, nx, ny);
  const int tx = nx / spec.tiles_x;
  const int ty = ny / spec.tiles_y;
  const double dx = spec.plaquette_w_nm / tx;
  const double dy = spec.plaquette_h_nm / ty;

  std::vector<double> motif(static_cast<std::size_t>(tx) * ty);
  for (int iy = 0; iy < ty; ++iy) {
    const double y = (iy + 0.5) * dy - 0.5 * spec.plaquette_h_nm;
    for (int ix = 0; ix < tx; ++ix) {
      const double x = (ix + 0.5) * dx - 0.5 * spec.plaquette_w_nm;
      motif[static_cast<std::size_t>(iy) * tx + ix] = indicator(spec, x, y);
    }
  }

  std::vector<double> chi(static_cast<std::size_t>(nx) * ny);
  for (int iy = 0; iy < ny; ++iy) {
    const double* src = &motif[static_cast<std::size_t>(iy % ty) * tx];
    double* dst = &chi[static_cast<std::size_t>(iy) * nx];
    for (int t = 0; t < spec.tiles_x; ++t) std::copy(src, src + tx, dst + t * tx);
  }
  return chi;
}

PhaseMap phase_map_from_indicator(const GratingSpec& spec, double lambda_nm, int nx, int ny,
                                  const std::vector<double>& chi) {
  check_grid(spec, nx, ny);
  if (!(lambda_nm > 0.0) || !std::isfinite(lambda_nm))
    throw std::invalid_argument("phase_map: wavelength must be positive");
  if (chi.size() != static_cast<std::size_t>(nx) * ny)
    throw std::invalid_argument("phase_map: indicator grid has the wrong size");

  PhaseMap pm;
  pm.nx = nx;
  pm.ny = ny;
  pm.dx = spec.plaquette_w_nm / (nx / spec.tiles_x);
  pm.dy = spec.plaquette_h_nm / (ny / spec.tiles_y);
  pm.lambda_nm = lambda_nm;
  pm.spec = spec;
  const double kappa = spec.phase_contrast(lambda_nm);
  pm.values.resize(chi.size());
  std::transform(chi.begin(), chi.end(), pm.values.begin(),
                 [kappa](double c) { return c == 0.0 ? 0.0 : -kappa * c; });
  return pm;
}

PhaseMap phase_map(const GratingSpec& spec, double lambda_nm, int nx, int ny) {
  return phase_map_from_indicator(spec, lambda_nm, nx, ny, indicator_grid(spec, nx, ny));
}

}  // namespace vortex
