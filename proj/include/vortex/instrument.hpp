#pragma once

// Spin-echo instrument constants, the xi(lambda) mapping and the empty-beam
// Chebyshev treatment.

#include <array>
#include <span>
#include <vector>

namespace vortex {

namespace constants {
inline constexpr double kNeutronMass = 1.67492749804e-27;  // kg
inline constexpr double kPlanck = 6.62607015e-34;          // J s
}  // namespace constants

/// Entanglement constant used for all reproductions unless overridden, nm^-1.
inline constexpr double kDefaultXi0 = 1.37e4;

struct InstrumentConfig {
  double freq_hz = 2.0e6;
  double length_rf_m = 1.2;
  double theta0_rad = 40.0 * 3.14159265358979323846 / 180.0;
  /// xi = xi0 lambda^2 with xi in nm and lambda in nm.
  double xi0_per_nm = kDefaultXi0;
  std::array<double, 2> band_nm{0.3, 1.05};
  /// Gaussian sigma of the xi resolution relative to xi.
  double frac_resolution = 2.0e-2;

  void validate() const;
  /// xi0 evaluated from freq, length and theta0.
  double computed_xi0() const;
  bool operator==(const InstrumentConfig&) const = default;
};

/// xi0 = 2 m_n f L cot(theta0) / h, converted to nm^-1.
double entanglement_constant(double freq_hz, double length_m, double theta0_rad);

/// xi0 * lambda^2 (nm).
double xi_of_lambda(double xi0_per_nm, double lambda_nm);

/// Inverse of xi_of_lambda.
double lambda_of_xi(double xi0_per_nm, double xi_nm);

/// Least-squares Chebyshev series over xi rescaled from [xi_min, xi_max] to
/// [-1, 1].
class ChebyshevFit {
 public:
  ChebyshevFit(std::vector<double> coefficients, double xi_min, double xi_max);

  double operator()(double xi) const;
  const std::vector<double>& coefficients() const { return coeffs_; }
  double xi_min() const { return xi_min_; }
  double xi_max() const { return xi_max_; }
  /// Maps xi into the [-1, 1] fitting variable.
  double to_unit(double xi) const;

 private:
  std::vector<double> coeffs_;
  double xi_min_;
  double xi_max_;
};

/// Requires at least order + 1 distinct abscissae; rank-deficient designs
/// throw std::invalid_argument.
ChebyshevFit chebyshev_fit(std::span<const double> xi, std::span<const double> p0, int order = 5);

/// Divides raw sample polarizations point by point by the fitted empty beam.
std::vector<double> normalize_by_empty_beam(std::span<const double> xi,
                                            std::span<const double> p_sample,
                                            const ChebyshevFit& empty_beam);

}  // namespace vortex
