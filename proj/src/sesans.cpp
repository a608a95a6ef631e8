#include "vortex/sesans.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include "fft.hpp"
#include "vortex/config.hpp"
#include "vortex/error.hpp"
#include "vortex/export.hpp"
#include "vortex/parallel.hpp"

namespace vortex {

using std::numbers::pi;

namespace {

constexpr double kAxisTolerance = 1e-12;

detail::cvec unit_field(const PhaseMap& pm) {
  if (pm.values.size() != static_cast<std::size_t>(pm.nx) * pm.ny)
    throw std::invalid_argument("sesans: malformed phase map");
  detail::cvec f(pm.values.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (!std::isfinite(pm.values[i])) throw std::invalid_argument("sesans: non-finite phase value");
    f[i] = std::polar(1.0, pm.values[i]);
  }
  return f;
}

double wrap_index(double pos, int n) {
  double w = std::fmod(pos, static_cast<double>(n));
  if (w < 0.0) w += n;
  return w;
}

// Linear interpolation of a periodic sequence at fractional index pos.
double periodic_lerp(const std::vector<double>& c, double pos) {
  const int n = static_cast<int>(c.size());
  const double w = wrap_index(pos, n);
  const int i0 = static_cast<int>(std::floor(w)) % n;
  const int i1 = (i0 + 1) % n;
  const double t = w - std::floor(w);
  return t == 0.0 ? c[i0] : (1.0 - t) * c[i0] + t * c[i1];
}

void check_finite(const std::vector<double>& v) {
  for (double x : v)
    if (!std::isfinite(x)) throw NumericalError("sesans: non-finite polarization");
}

// Normalised correlation along one axis; index s is a shift of s cells.
std::vector<double> axis_correlation(const PhaseMap& pm, bool along_x) {
  auto f = unit_field(pm);
  const int n = along_x ? pm.nx : pm.ny;
  if (along_x) detail::fft_rows(f, pm.nx, pm.ny, detail::FftDirection::forward);
  else detail::fft_columns(f, pm.nx, pm.ny, detail::FftDirection::forward);

  // Project the intensity onto the encoding axis.
  detail::cvec proj(n);
  for (int iy = 0; iy < pm.ny; ++iy)
    for (int ix = 0; ix < pm.nx; ++ix)
      proj[along_x ? ix : iy] += std::norm(f[static_cast<std::size_t>(iy) * pm.nx + ix]);

  detail::fft_1d(proj, detail::FftDirection::backward);
  std::vector<double> c(n);
  const double c0 = proj[0].real();
  for (int s = 0; s < n; ++s) c[s] = proj[s].real() / c0;
  check_finite(c);
  return c;
}

}  // namespace

double SesansMap::periodic_value(double xi_x, double xi_y) const {
  const double fx = wrap_index(xi_x / dxi_x + nx / 2, nx);
  const double fy = wrap_index(xi_y / dxi_y + ny / 2, ny);
  const int x0 = static_cast<int>(std::floor(fx)) % nx;
  const int y0 = static_cast<int>(std::floor(fy)) % ny;
  const int x1 = (x0 + 1) % nx;
  const int y1 = (y0 + 1) % ny;
  const double tx = fx - std::floor(fx);
  const double ty = fy - std::floor(fy);
  const double bottom = (1.0 - tx) * at(x0, y0) + (tx == 0.0 ? 0.0 : tx * at(x1, y0));
  if (ty == 0.0) return bottom;
  const double top = (1.0 - tx) * at(x0, y1) + (tx == 0.0 ? 0.0 : tx * at(x1, y1));
  return (1.0 - ty) * bottom + ty * top;
}

SesansMap polarization_map(const PhaseMap& pm) {
  auto f = unit_field(pm);
  detail::fft_2d(f, pm.nx, pm.ny, detail::FftDirection::forward);
  for (auto& v : f) v = std::norm(v);
  detail::fft_2d(f, pm.nx, pm.ny, detail::FftDirection::backward);

  SesansMap map;
  map.nx = pm.nx;
  map.ny = pm.ny;
  map.dxi_x = pm.dx;
  map.dxi_y = pm.dy;
  map.lambda_nm = pm.lambda_nm;
  map.xi_x_axis.resize(pm.nx);
  map.xi_y_axis.resize(pm.ny);
  for (int j = 0; j < pm.nx; ++j) map.xi_x_axis[j] = (j - pm.nx / 2) * pm.dx;
  for (int j = 0; j < pm.ny; ++j) map.xi_y_axis[j] = (j - pm.ny / 2) * pm.dy;

  const double c0 = f[0].real();
  map.pol.resize(f.size());
  for (int jy = 0; jy < pm.ny; ++jy) {
    const int sy = (jy - pm.ny / 2 + pm.ny) % pm.ny;
    for (int jx = 0; jx < pm.nx; ++jx) {
      const int sx = (jx - pm.nx / 2 + pm.nx) % pm.nx;
      map.pol[static_cast<std::size_t>(jy) * pm.nx + jx] =
          f[static_cast<std::size_t>(sy) * pm.nx + sx].real() / c0;
    }
  }
  check_finite(map.pol);
  return map;
}

SesansCurve polarization_slice(const SesansMap& map, double orientation_rad, std::span<const double> xi) {
  const double c = std::cos(orientation_rad);
  const double s = std::sin(orientation_rad);
  auto inside = [](double v, const std::vector<double>& axis, double step) {
    return v >= axis.front() - kAxisTolerance * step && v <= axis.back() + kAxisTolerance * step;
  };
  SesansCurve curve;
  curve.orientation_rad = orientation_rad;
  curve.mode = SesansMode::monochromatic;
  for (double x : xi) {
    const double px = x * c, py = x * s;
    if (!inside(px, map.xi_x_axis, map.dxi_x) || !inside(py, map.xi_y_axis, map.dxi_y))
      throw std::invalid_argument("polarization_slice: xi outside the map extent");
    curve.xi_nm.push_back(x);
    curve.pol.push_back(map.periodic_value(px, py));
    curve.lambda_nm.push_back(map.lambda_nm);
  }
  return curve;
}

double autocorrelation_oracle(const PhaseMap& pm, double xi_x, double xi_y) {
  const double fx = xi_x / pm.dx;
  const double fy = xi_y / pm.dy;
  const double rx = std::round(fx), ry = std::round(fy);
  if (std::abs(fx - rx) > 1e-9 * std::max(1.0, std::abs(fx)) ||
      std::abs(fy - ry) > 1e-9 * std::max(1.0, std::abs(fy)))
    throw std::invalid_argument("autocorrelation_oracle: shift is not a whole number of cells");
  const int sx = static_cast<int>(wrap_index(rx, pm.nx));
  const int sy = static_cast<int>(wrap_index(ry, pm.ny));

  double sum = 0.0;
  for (int iy = 0; iy < pm.ny; ++iy) {
    const int ty = (iy + sy) % pm.ny;
    for (int ix = 0; ix < pm.nx; ++ix) {
      const int tx = (ix + sx) % pm.nx;
      sum += std::cos(pm.at(tx, ty) - pm.at(ix, iy));
    }
  }
  return sum / (static_cast<double>(pm.nx) * pm.ny);
}

std::vector<double> polarization_along(const PhaseMap& pm, double orientation_rad,
                                       std::span<const double> xi) {
  const double c = std::cos(orientation_rad);
  const double s = std::sin(orientation_rad);
  std::vector<double> out;
  out.reserve(xi.size());
  if (std::abs(s) < 1e-12) {
    const auto corr = axis_correlation(pm, true);
    for (double x : xi) out.push_back(periodic_lerp(corr, x * c / pm.dx));
  } else if (std::abs(c) < 1e-12) {
    const auto corr = axis_correlation(pm, false);
    for (double x : xi) out.push_back(periodic_lerp(corr, x * s / pm.dy));
  } else {
    const auto map = polarization_map(pm);
    for (double x : xi) out.push_back(map.periodic_value(x * c, x * s));
  }
  return out;
}

namespace {

GratingSpec single_plaquette(GratingSpec spec) {
  spec.tiles_x = 1;
  spec.tiles_y = 1;
  return spec;
}

}  // namespace

SesansCurve monochromatic_curve(const GratingSpec& spec, double lambda_nm, double orientation_rad,
                                std::span<const double> xi, int samples_per_period) {
  const auto motif = single_plaquette(spec);
  const auto shape = grid_for(motif, samples_per_period);
  const auto pm = phase_map(motif, lambda_nm, shape.nx, shape.ny);
  SesansCurve curve;
  curve.xi_nm.assign(xi.begin(), xi.end());
  curve.pol = polarization_along(pm, orientation_rad, xi);
  curve.lambda_nm.assign(xi.size(), lambda_nm);
  curve.orientation_rad = orientation_rad;
  curve.mode = SesansMode::monochromatic;
  return curve;
}

SesansCurve tof_curve_at(const GratingSpec& spec, const InstrumentConfig& inst, double orientation_rad,
                         std::span<const double> lambdas_nm, int samples_per_period) {
  inst.validate();
  if (lambdas_nm.empty()) throw std::invalid_argument("tof_curve: no wavelengths");
  for (std::size_t i = 0; i < lambdas_nm.size(); ++i) {
    if (!(lambdas_nm[i] > 0.0) || !std::isfinite(lambdas_nm[i]))
      throw std::invalid_argument("tof_curve: wavelengths must be positive");
    if (i > 0 && !(lambdas_nm[i] > lambdas_nm[i - 1]))
      throw std::invalid_argument("tof_curve: wavelengths must be strictly increasing");
  }

  const auto motif = single_plaquette(spec);
  const auto shape = grid_for(motif, samples_per_period);
  const auto chi = indicator_grid(motif, shape.nx, shape.ny);

  SesansCurve curve;
  curve.mode = SesansMode::tof;
  curve.orientation_rad = orientation_rad;
  curve.xi0_per_nm = inst.xi0_per_nm;
  curve.band_nm = inst.band_nm;
  curve.lambda_nm.assign(lambdas_nm.begin(), lambdas_nm.end());
  curve.xi_nm.resize(lambdas_nm.size());
  curve.pol.resize(lambdas_nm.size());
  parallel_for(lambdas_nm.size(), [&](std::size_t i) {
    const double lambda = lambdas_nm[i];
    const double xi = xi_of_lambda(inst.xi0_per_nm, lambda);
    const auto pm = phase_map_from_indicator(motif, lambda, shape.nx, shape.ny, chi);
    const double one[] = {xi};
    curve.xi_nm[i] = xi;
    curve.pol[i] = polarization_along(pm, orientation_rad, one)[0];
  });
  return curve;
}

SesansCurve tof_curve(const GratingSpec& spec, const InstrumentConfig& inst, double orientation_rad,
                      int n_lambda, int samples_per_period) {
  inst.validate();
  if (n_lambda < 2) throw std::invalid_argument("tof_curve: n_lambda must be >= 2");
  std::vector<double> lambdas(n_lambda);
  const double lo = inst.band_nm[0], hi = inst.band_nm[1];
  for (int i = 0; i < n_lambda; ++i) lambdas[i] = lo + (hi - lo) * i / (n_lambda - 1);
  return tof_curve_at(spec, inst, orientation_rad, lambdas, samples_per_period);
}

SesansCurve convolve_resolution(const SesansCurve& curve, double frac_width) {
  if (!(frac_width >= 0.0 && frac_width <= 0.2))
    throw std::invalid_argument("convolve_resolution: frac_width must lie in [0, 0.2]");
  if (curve.resolution_applied)
    throw std::invalid_argument("convolve_resolution: resolution already applied to this curve");
  const auto& xi = curve.xi_nm;
  if (xi.size() != curve.pol.size()) throw std::invalid_argument("convolve_resolution: malformed curve");
  for (std::size_t i = 1; i < xi.size(); ++i)
    if (!(xi[i] > xi[i - 1]))
      throw std::invalid_argument("convolve_resolution: xi must be strictly increasing");

  SesansCurve out = curve;
  out.resolution_applied = true;
  out.resolution_frac = frac_width;
  const std::size_t n = xi.size();
  if (frac_width == 0.0 || n < 2) return out;

  // Trapezoid weights of the sampled support.
  std::vector<double> w(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double left = j > 0 ? xi[j] - xi[j - 1] : 0.0;
    const double right = j + 1 < n ? xi[j + 1] - xi[j] : 0.0;
    w[j] = 0.5 * (left + right);
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double sigma = frac_width * std::abs(xi[i]);
    if (sigma == 0.0) continue;
    double num = 0.0, den = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double z = (xi[j] - xi[i]) / sigma;
      if (std::abs(z) > 12.0) continue;
      const double g = std::exp(-0.5 * z * z) * w[j];
      num += g * curve.pol[j];
      den += g;
    }
    if (den > 0.0) out.pol[i] = num / den;
  }
  return out;
}

SesansCurve stack_product(std::span<const SesansCurve> curves) {
  if (curves.empty()) throw std::invalid_argument("stack_product: no curves");
  const auto& first = curves.front();
  SesansCurve out = first;
  for (std::size_t k = 1; k < curves.size(); ++k) {
    const auto& c = curves[k];
    if (c.xi_nm != first.xi_nm || c.pol.size() != first.pol.size())
      throw std::invalid_argument("stack_product: curves are sampled on different xi grids");
    if (c.orientation_rad != first.orientation_rad || c.mode != first.mode ||
        c.lambda_nm != first.lambda_nm || c.resolution_applied != first.resolution_applied)
      throw std::invalid_argument("stack_product: curves differ in orientation, mode or resolution");
    for (std::size_t i = 0; i < out.pol.size(); ++i) out.pol[i] *= c.pol[i];
  }
  return out;
}

double equivalent_stack_depth(double depth_nm, int n_gratings) {
  if (n_gratings < 1) throw std::invalid_argument("equivalent_stack_depth: n_gratings must be >= 1");
  return depth_nm * std::sqrt(static_cast<double>(n_gratings));
}

std::vector<double> projected_cosine_transform(const DiffractionPattern& dp, std::span<const int> shift_cells) {
  std::vector<double> proj(dp.nx, 0.0);
  for (int iy = 0; iy < dp.ny; ++iy)
    for (int ix = 0; ix < dp.nx; ++ix) proj[ix] += dp.intensity_at(ix, iy);
  double total = 0.0;
  for (double v : proj) total += v;

  std::vector<double> out;
  out.reserve(shift_cells.size());
  for (int s : shift_cells) {
    double acc = 0.0;
    for (int ix = 0; ix < dp.nx; ++ix) {
      // q_x xi = 2 pi (ix - nx/2) s / nx, reduced exactly modulo nx
      const long long k = (static_cast<long long>(ix - dp.nx / 2) * s) % dp.nx;
      acc += proj[ix] * std::cos(2.0 * pi * static_cast<double>(k) / dp.nx);
    }
    out.push_back(acc / total);
  }
  return out;
}

void write_csv(std::ostream& os, const SesansCurve& curve) {
  const bool tof = curve.mode == SesansMode::tof;
  os << (tof ? "xi_nm,pol,lambda_nm\n" : "xi_nm,pol\n");
  for (std::size_t i = 0; i < curve.xi_nm.size(); ++i) {
    os << format_double(curve.xi_nm[i]) << ',' << format_double(curve.pol[i]);
    if (tof) os << ',' << format_double(curve.lambda_nm[i]);
    os << '\n';
  }
}

void write_csv(std::ostream& os, const SesansMap& map) {
  os << "xi_x_nm,xi_y_nm,pol\n";
  for (int iy = 0; iy < map.ny; ++iy)
    for (int ix = 0; ix < map.nx; ++ix)
      os << format_double(map.xi_x_axis[ix]) << ',' << format_double(map.xi_y_axis[iy]) << ','
         << format_double(map.at(ix, iy)) << '\n';
}

std::string curve_sidecar_json(const SesansCurve& curve, const GratingSpec& spec,
                               const InstrumentConfig& inst) {
  nlohmann::ordered_json j;
  j["mode"] = curve.mode == SesansMode::tof ? "tof" : "monochromatic";
  j["orientation_deg"] = std::round(curve.orientation_rad * 180.0 / pi * 1e9) / 1e9;
  j["points"] = curve.xi_nm.size();
  if (curve.mode == SesansMode::tof) {
    j["xi0_per_nm"] = curve.xi0_per_nm;
    j["band_nm"] = {curve.band_nm[0], curve.band_nm[1]};
  } else if (!curve.lambda_nm.empty()) {
    j["lambda_nm"] = curve.lambda_nm.front();
  }
  j["resolution"] = {{"applied", curve.resolution_applied}, {"frac_width", curve.resolution_frac}};
  j["grating"] = grating_to_json(spec);
  j["instrument"] = instrument_to_json(inst);
  return j.dump(2) + "\n";
}

}  // namespace vortex
