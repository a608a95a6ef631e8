#pragma once

// One-parameter groove-depth fit of a time-of-flight SESANS curve.

#include <string>
#include <vector>

#include "vortex/grating.hpp"
#include "vortex/instrument.hpp"
#include "vortex/sesans.hpp"

namespace vortex {

struct DepthFitPoint {
  double d_nm;
  double sse;
};

struct DepthFitResult {
  double d_best_nm = 0.0;
  double sse = 0.0;
  /// Grid trace in increasing depth; golden-section refinements are not
  /// included.
  std::vector<DepthFitPoint> grid;
  /// Objective varies by less than 1e-9 of its scale over the range.
  bool flat_objective = false;
  /// Measured polarization deviates from 1 by less than 1e-6 everywhere.
  bool contrast_free = false;
  /// Points of the measured curve inside the simulated band, used in the SSE.
  std::size_t points_used = 0;
  GratingSpec spec;  ///< template with depth_nm = d_best_nm
  InstrumentConfig instrument;
  /// Resolution-convolved model at d_best on the used points.
  SesansCurve best_model;
  SesansCurve data_used;
};

/// Resolution-convolved TOF model of spec at the given wavelengths.
SesansCurve depth_model(const GratingSpec& spec, const InstrumentConfig& inst, double orientation_rad,
                        const std::vector<double>& lambdas_nm, int samples_per_period);

/// Grid search over [d_lo, d_hi] with n_grid points followed by golden-section
/// refinement around the best grid point. Measured points without a wavelength
/// take lambda = sqrt(xi / xi0); at least 10 must fall inside the band.
DepthFitResult fit_depth(const SesansCurve& measured, const GratingSpec& template_spec,
                         const InstrumentConfig& inst, double d_lo_nm, double d_hi_nm, int n_grid,
                         int samples_per_period = 32);

/// Report with d_best_nm, sse, grid, flags, spec and instrument snapshots.
std::string fit_report_json(const DepthFitResult& result);

}  // namespace vortex
