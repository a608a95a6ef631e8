#pragma once

// Forked phase gratings: groove indicator functions, plaquette tiling and
// the accumulated neutron phase map. All lengths are in nanometres.

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace vortex {

enum class GrooveProfile { rectangular, triangular, trapezoidal };

std::string_view to_string(GrooveProfile profile);
GrooveProfile profile_from_string(std::string_view name);

/// Scattering length density of silicon, nm^-2.
inline constexpr double kSiliconSld = 2.07e-4;

/// Geometry and material of one forked-grating plaquette array.
///
/// The plaquette centre carries the topological defect; (x, y) passed to
/// indicator() are measured from it. Tiles repeat the plaquette in registry.
struct GratingSpec {
  double period_nm = 2000.0;
  int charge = 1;
  double depth_nm = 5500.0;
  /// Groove fraction of the period. Only the rectangular profile uses it;
  /// triangular and trapezoidal profiles are fixed at 50%.
  double duty = 0.5;
  GrooveProfile profile = GrooveProfile::rectangular;
  /// Plateau parameter c >= 1 of the trapezoidal profile (c = 1 is triangular).
  double trapezoid_c = 1.0;
  double plaquette_w_nm = 10000.0;
  double plaquette_h_nm = 10000.0;
  /// Radius of the etched-away disc at the defect; chi = 1 inside.
  double hole_radius_nm = 500.0;
  int tiles_x = 1;
  int tiles_y = 1;
  double sld_per_nm2 = kSiliconSld;

  /// Throws std::invalid_argument when an invariant is violated.
  void validate() const;

  double extent_x() const { return tiles_x * plaquette_w_nm; }
  double extent_y() const { return tiles_y * plaquette_h_nm; }
  /// rho * lambda * d: the phase step between land and groove.
  double phase_contrast(double lambda_nm) const { return sld_per_nm2 * lambda_nm * depth_nm; }

  bool operator==(const GratingSpec&) const = default;
};

/// alpha = (2 pi / p) x - m phi with phi = atan2(y, x) in (-pi, pi] and
/// phi(0, 0) = 0.
double azimuthal_arg(double x, double y, double period_nm, int charge);

/// Groove indicator chi(x, y) in [0, 1] relative to the plaquette centre.
double indicator(const GratingSpec& spec, double x, double y);

/// Fourier coefficient sinc(n pi / 2) of the 50% rectangular profile.
/// Exact zero for even n.
double fourier_weight(int n);

/// Real phase Phi(x, y) = -rho lambda d chi(x, y) sampled at cell centres of a
/// uniform grid spanning the whole tiled area. Row-major, iy outer.
struct PhaseMap {
  int nx = 0;
  int ny = 0;
  double dx = 0.0;
  double dy = 0.0;
  double lambda_nm = 0.0;
  std::vector<double> values;
  GratingSpec spec;

  double at(int ix, int iy) const { return values[static_cast<std::size_t>(iy) * nx + ix]; }
  double extent_x() const { return nx * dx; }
  double extent_y() const { return ny * dy; }
};

inline constexpr int kMinSamplesPerPeriod = 8;
inline constexpr int kDefaultSamplesPerPeriod = 64;

/// Builds the phase map on an nx-by-ny grid over the tiled area.
/// nx and ny must be multiples of tiles_x and tiles_y; the grid spacing must
/// give at least kMinSamplesPerPeriod samples per period in both directions.
PhaseMap phase_map(const GratingSpec& spec, double lambda_nm, int nx, int ny);

/// Grid dimensions giving roughly samples_per_period cells per period while
/// keeping an integer number of cells per tile.
struct GridShape {
  int nx;
  int ny;
};
GridShape grid_for(const GratingSpec& spec, int samples_per_period = kDefaultSamplesPerPeriod);

/// Indicator sampled on the same cell-centre grid as phase_map().
std::vector<double> indicator_grid(const GratingSpec& spec, int nx, int ny);

/// Phase map from a precomputed indicator grid; used when only lambda or the
/// depth change between evaluations.
PhaseMap phase_map_from_indicator(const GratingSpec& spec, double lambda_nm, int nx, int ny,
                                  const std::vector<double>& chi);

}  // namespace vortex
