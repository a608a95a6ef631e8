#pragma once

// SESANS polarization from phase maps. The polarization is the real part of
// the autocorrelation of exp(i Phi), normalised to its zero-shift value; the
// grid is treated as one period of an infinite array.

#include <array>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "vortex/diffraction.hpp"
#include "vortex/grating.hpp"
#include "vortex/instrument.hpp"

namespace vortex {

enum class SesansMode { monochromatic, tof };

struct SesansCurve {
  std::vector<double> xi_nm;
  std::vector<double> pol;
  /// Per-point wavelength; filled in both modes.
  std::vector<double> lambda_nm;
  /// 0 = perpendicular (xi along x), pi/2 = parallel (xi along y).
  double orientation_rad = 0.0;
  SesansMode mode = SesansMode::monochromatic;
  double xi0_per_nm = 0.0;  ///< tof only
  std::array<double, 2> band_nm{0.0, 0.0};  ///< tof only
  bool resolution_applied = false;
  double resolution_frac = 0.0;
};

struct SesansMap {
  int nx = 0;
  int ny = 0;
  double dxi_x = 0.0;
  double dxi_y = 0.0;
  std::vector<double> xi_x_axis;  ///< (j - nx/2) dxi_x
  std::vector<double> xi_y_axis;
  std::vector<double> pol;  ///< row-major, xi_y outer
  double lambda_nm = 0.0;

  double at(int ix, int iy) const { return pol[static_cast<std::size_t>(iy) * nx + ix]; }
  /// Bilinear value at (xi_x, xi_y) using the map's periodicity.
  double periodic_value(double xi_x, double xi_y) const;
};

/// Full 2D polarization map by transform, squared modulus and inverse
/// transform.
SesansMap polarization_map(const PhaseMap& pm);

/// Bilinear samples along the ray (xi cos t, xi sin t). Every requested xi
/// must lie inside the map's axes.
SesansCurve polarization_slice(const SesansMap& map, double orientation_rad, std::span<const double> xi);

/// Direct double sum over the grid with periodic wraparound, normalised by the
/// zero-shift sum. Shifts must be integer multiples of the cell size.
double autocorrelation_oracle(const PhaseMap& pm, double xi_x, double xi_y);

/// Polarization of one phase map at arbitrary xi along the given orientation,
/// using the periodicity of the correlation. The axis-aligned orientations
/// project the diffraction intensity onto the encoding axis and take one
/// inverse 1D transform.
std::vector<double> polarization_along(const PhaseMap& pm, double orientation_rad,
                                       std::span<const double> xi);

/// Monochromatic curve at fixed lambda for arbitrary xi.
SesansCurve monochromatic_curve(const GratingSpec& spec, double lambda_nm, double orientation_rad,
                                std::span<const double> xi,
                                int samples_per_period = kDefaultSamplesPerPeriod);

/// Time-of-flight curve: one phase map per wavelength, polarization at
/// xi = xi0 lambda^2. Wavelengths are spread uniformly over the band.
/// Plaquettes tile in registry with periodic wraparound, so the curve is
/// evaluated on a single plaquette.
SesansCurve tof_curve(const GratingSpec& spec, const InstrumentConfig& inst, double orientation_rad,
                      int n_lambda, int samples_per_period = kDefaultSamplesPerPeriod);

/// Same, at explicit wavelengths.
SesansCurve tof_curve_at(const GratingSpec& spec, const InstrumentConfig& inst, double orientation_rad,
                         std::span<const double> lambdas_nm,
                         int samples_per_period = kDefaultSamplesPerPeriod);

/// Gaussian smoothing in xi with sigma = frac_width * xi at each output point,
/// renormalised to unit mass over the sampled points.
SesansCurve convolve_resolution(const SesansCurve& curve, double frac_width);

/// Elementwise product of curves measured on identical grids.
SesansCurve stack_product(std::span<const SesansCurve> curves);

/// Single-grating depth with the same small-contrast polarization as n_g
/// stacked gratings of depth d.
double equivalent_stack_depth(double depth_nm, int n_gratings);

/// sum_q I(q) cos(q_x xi) / sum_q I(q) for xi = shift_cells * dx, i.e. the
/// cosine transform of the intensity projected onto q_x. Requires an
/// unpadded, unwindowed pattern.
std::vector<double> projected_cosine_transform(const DiffractionPattern& dp, std::span<const int> shift_cells);

/// CSV with header xi_nm,pol (monochromatic) or xi_nm,pol,lambda_nm (tof).
void write_csv(std::ostream& os, const SesansCurve& curve);
/// Long-format CSV with header xi_x_nm,xi_y_nm,pol.
void write_csv(std::ostream& os, const SesansMap& map);

/// JSON sidecar carrying spec, instrument, orientation and resolution metadata.
std::string curve_sidecar_json(const SesansCurve& curve, const GratingSpec& spec,
                               const InstrumentConfig& inst);

}  // namespace vortex
