#pragma once

// Special-function kernels and the closed-form Bragg-donut amplitude.

#include <complex>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace vortex {

/// sin(x) / x with sinc(0) = 1.
double sinc(double x);

/// Bessel function of the first kind J_n(x) for integer order.
/// Supported envelope: |n| <= 64, 0 <= x <= 1e4; negative orders use
/// J_{-n} = (-1)^n J_n. Absolute error below 1e-12 on the envelope.
double bessel_j(int n, double x);

/// Struve function H_k(x) for k in {0, 1} and 0 <= x <= 1e3.
double struve_h(int k, double x);

/// Generalized hypergeometric 1F2(a; b1, b2; z) by direct summation of the
/// power series, stopping when the term ratio falls below 1e-12 relative.
/// Throws NumericalError on non-convergence within 10000 terms or when
/// cancellation between terms leaves fewer than ~8 significant digits.
double hyp1f2(double a, double b1, double b2, double z);

/// Largest |n m| accepted by the donut kernels.
inline constexpr int kMaxDonutOrder = 32;

/// Integral from 0 to R of r J_n(q r) dr via the closed 1F2 form.
double bessel_moment(int n, double q, double R);

/// The same integral reduced by the Bessel recurrence to J_0, J_1 (even n)
/// or to J_0 H_1 and J_1 H_0 (odd n). Reliable for q R >= 1.
double bessel_moment_reduced(int n, double q, double R);

/// Parameters shared by every point of one analytic Bragg-donut profile.
struct DonutParams {
  int order_n = 1;
  int charge_m = 1;
  /// +1 for the order centred at q_x = +2 pi n / p, -1 for its conjugate.
  int side = 1;
  /// Regulator radius; R q' is dimensionless, so R carries the inverse unit
  /// of the q' axis.
  double regulator_R = 0.4;
  double lambda_nm = 0.4;
  /// e^{-i rho lambda d} - 1.
  std::complex<double> contrast{-2.0, 0.0};
};

/// Far-field amplitude of diffraction order (n, side) at polar offset
/// (q', phi') from the order centre. Rejects n m = 0 and |n m| > 32.
/// The azimuthal phase winds as exp(-i side n m phi').
std::complex<double> donut_amplitude(const DonutParams& params, double q_prime, double phi_prime);

/// C_nm prefactor of the donut intensity.
double donut_intensity_prefactor(const DonutParams& params);

/// Smallest radius m lambda / (2 pi) of a charge-m vortex beam.
double min_vortex_radius(int m, double lambda_nm);

/// Analytic radial profile of one donut at phi' = 0.
struct DonutProfile {
  DonutParams params;
  std::vector<double> q_prime;
  std::vector<std::complex<double>> amplitude;
  std::vector<double> intensity;

  /// Winding sign of the azimuthal phase, -side * sign(n m).
  int azim_phase_sign() const;
};

DonutProfile donut_profile(const DonutParams& params, std::span<const double> q_prime);

/// CSV with header q_prime,intensity,re_amplitude,im_amplitude.
void write_csv(std::ostream& os, const DonutProfile& profile);

/// Non-empty when the regulator makes the donut of order |n m| wide enough to
/// reach half the order spacing (R < |n m| p / pi), where neighbouring donuts
/// overlap and the single-order estimate no longer holds. Advisory only.
std::string regulator_warning(double regulator_R, double period_nm, int abs_nm);

}  // namespace vortex
