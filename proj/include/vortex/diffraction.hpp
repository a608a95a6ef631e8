#pragma once

// Phase-object far-field diffraction of a phase map, order weights and the
// radial analysis of Bragg donuts.

#include <complex>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <vector>

#include "vortex/grating.hpp"

namespace vortex {

/// D_0 = (e^{-i rho lambda d} + 1) / 2, amplitude of the unscattered beam.
std::complex<double> transmitted_amplitude(double rho, double lambda_nm, double depth_nm);

/// (e^{-i rho lambda d} - 1) / 2 * sinc(n pi / 2), weight of each conjugate
/// order n >= 1 of the 50% rectangular grating.
std::complex<double> order_weight(int n, double rho, double lambda_nm, double depth_nm);

/// Small-angle deviation n lambda / p of order n.
double order_angle(int n, double lambda_nm, double period_nm);

struct DiffractionOptions {
  /// Zero-padding factor (>= 1). Padding refines the q sampling; the padded
  /// region is unilluminated.
  int padding = 1;
  /// Raised-cosine (Hann) window over the illuminated aperture.
  bool apodize = false;
};

/// f(q) = (-i / lambda) * integral of exp(-i q.r) exp(i Phi(r)) over the
/// illuminated area, on a centred q grid: q = 2 pi (j - N/2) / (N dx).
/// Positions are measured from the centre of the phase map.
struct DiffractionPattern {
  int nx = 0;
  int ny = 0;
  double dqx = 0.0;
  double dqy = 0.0;
  std::vector<double> qx_axis;
  std::vector<double> qy_axis;
  std::vector<std::complex<double>> amplitude;  ///< row-major, qy outer
  std::vector<double> intensity;
  double lambda_nm = 0.0;
  /// Sum of |e^{i Phi} w|^2 dx dy over the illuminated cells; the area itself
  /// when no window is applied.
  double field_norm = 0.0;
  GratingSpec source_spec;

  double intensity_at(int ix, int iy) const {
    return intensity[static_cast<std::size_t>(iy) * nx + ix];
  }
  /// Index of q = 0 along each axis.
  int center_x() const { return nx / 2; }
  int center_y() const { return ny / 2; }
};

DiffractionPattern diffraction_pattern(const PhaseMap& pm, const DiffractionOptions& options = {});

/// |sum I dqx dqy - (2 pi / lambda)^2 field_norm| relative to the latter.
double parseval_residual(const DiffractionPattern& dp);

/// Azimuthal average of the intensity about the order centre
/// (side * 2 pi n / p, 0), out to q' = pi / p.
struct RadialProfile {
  int order_n = 1;
  int side = 1;
  double center_qx = 0.0;
  double bin_width = 0.0;
  std::vector<double> q_prime;  ///< bin centres
  std::vector<double> intensity;  ///< bin means; 0 where the bin is empty
  std::vector<std::size_t> counts;

  bool empty_bin(std::size_t b) const { return counts[b] == 0; }
  bool has_empty_bins() const;
};

RadialProfile radial_profile(const DiffractionPattern& dp, int n, int side, int nbins);

/// Radius of maximum intensity refined by a three-point parabola, or nullopt
/// when the maximum sits at either end of the profile (not a donut).
/// Requires at least 8 bins.
std::optional<double> donut_peak_radius(const RadialProfile& profile);

/// Integrated intensity sum I dqx dqy over the disc q' < pi / p about the
/// order centre.
double annulus_integral(const DiffractionPattern& dp, int n, int side);

/// Binary grid: five little-endian float64 header values
/// (nx, ny, dqx, dqy, lambda_nm) followed by nx*ny float64 intensities,
/// row-major with qy outer and q = 0 at index (nx/2, ny/2).
void write_grid(std::ostream& os, const DiffractionPattern& dp);

struct GridFile {
  int nx = 0;
  int ny = 0;
  double dqx = 0.0;
  double dqy = 0.0;
  double lambda_nm = 0.0;
  std::vector<double> intensity;
};
GridFile read_grid(std::istream& is);

/// CSV with header q_prime,intensity,count,empty.
void write_csv(std::ostream& os, const RadialProfile& profile);

}  // namespace vortex
