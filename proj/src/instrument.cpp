#include "vortex/instrument.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <stdexcept>

namespace vortex {

void InstrumentConfig::validate() const {
  auto fail = [](const char* what) { throw std::invalid_argument(std::string("InstrumentConfig: ") + what); };
  if (!(freq_hz > 0.0)) fail("freq_hz must be positive");
  if (!(length_rf_m > 0.0)) fail("length_rf_m must be positive");
  if (!(theta0_rad > 0.0 && theta0_rad < 0.5 * std::numbers::pi)) fail("theta0 must lie in (0, pi/2)");
  if (!(xi0_per_nm > 0.0) || !std::isfinite(xi0_per_nm)) fail("xi0 must be positive");
  if (!(band_nm[0] > 0.0 && band_nm[0] < band_nm[1]) || !std::isfinite(band_nm[1]))
    fail("wavelength band must satisfy 0 < lambda_min < lambda_max");
  if (!(frac_resolution >= 0.0 && frac_resolution <= 0.2)) fail("frac_resolution must lie in [0, 0.2]");
}

double InstrumentConfig::computed_xi0() const {
  return entanglement_constant(freq_hz, length_rf_m, theta0_rad);
}

double entanglement_constant(double freq_hz, double length_m, double theta0_rad) {
  if (!(freq_hz > 0.0) || !(length_m > 0.0))
    throw std::invalid_argument("entanglement_constant: frequency and length must be positive");
  if (!(theta0_rad > 0.0 && theta0_rad < 0.5 * std::numbers::pi))
    throw std::invalid_argument("entanglement_constant: theta0 must lie in (0, pi/2)");
  const double cot = std::cos(theta0_rad) / std::sin(theta0_rad);
  const double per_m = 2.0 * constants::kNeutronMass * freq_hz * length_m * cot / constants::kPlanck;
  // xi[m] = per_m * lambda[m]^2  ->  xi[nm] = per_m * 1e-9 * lambda[nm]^2
  return per_m * 1e-9;
}

double xi_of_lambda(double xi0_per_nm, double lambda_nm) {
  if (!(xi0_per_nm > 0.0) || !(lambda_nm >= 0.0))
    throw std::invalid_argument("xi_of_lambda: inputs must be non-negative");
  return xi0_per_nm * lambda_nm * lambda_nm;
}

double lambda_of_xi(double xi0_per_nm, double xi_nm) {
  if (!(xi0_per_nm > 0.0) || !(xi_nm >= 0.0))
    throw std::invalid_argument("lambda_of_xi: inputs must be non-negative");
  return std::sqrt(xi_nm / xi0_per_nm);
}

ChebyshevFit::ChebyshevFit(std::vector<double> coefficients, double xi_min, double xi_max)
    : coeffs_(std::move(coefficients)), xi_min_(xi_min), xi_max_(xi_max) {
  if (coeffs_.empty()) throw std::invalid_argument("ChebyshevFit: no coefficients");
  if (!(xi_max_ > xi_min_)) throw std::invalid_argument("ChebyshevFit: empty abscissa range");
}

double ChebyshevFit::to_unit(double xi) const {
  return (2.0 * xi - (xi_min_ + xi_max_)) / (xi_max_ - xi_min_);
}

double ChebyshevFit::operator()(double xi) const {
  // Clenshaw recurrence
  const double t = to_unit(xi);
  double b1 = 0.0, b2 = 0.0;
  for (std::size_t k = coeffs_.size(); k-- > 1;) {
    const double b0 = 2.0 * t * b1 - b2 + coeffs_[k];
    b2 = b1;
    b1 = b0;
  }
  return t * b1 - b2 + coeffs_[0];
}

ChebyshevFit chebyshev_fit(std::span<const double> xi, std::span<const double> p0, int order) {
  if (order < 0) throw std::invalid_argument("chebyshev_fit: negative order");
  if (xi.size() != p0.size()) throw std::invalid_argument("chebyshev_fit: size mismatch");
  const std::set<double> distinct(xi.begin(), xi.end());
  if (distinct.size() < static_cast<std::size_t>(order) + 1)
    throw std::invalid_argument("chebyshev_fit: fewer distinct points than coefficients");
  for (double v : xi)
    if (!std::isfinite(v)) throw std::invalid_argument("chebyshev_fit: non-finite abscissa");

  const double lo = *distinct.begin();
  const double hi = *distinct.rbegin();
  const auto rows = static_cast<Eigen::Index>(xi.size());
  const Eigen::Index cols = order + 1;
  Eigen::MatrixXd design(rows, cols);
  Eigen::VectorXd rhs(rows);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const double t = (2.0 * xi[i] - (lo + hi)) / (hi - lo);
    design(i, 0) = 1.0;
    if (cols > 1) design(i, 1) = t;
    for (Eigen::Index k = 2; k < cols; ++k) design(i, k) = 2.0 * t * design(i, k - 1) - design(i, k - 2);
    rhs(i) = p0[i];
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  qr.setThreshold(1e-12);
  if (qr.rank() < cols) throw std::invalid_argument("chebyshev_fit: rank-deficient design");
  const Eigen::VectorXd c = qr.solve(rhs);
  return ChebyshevFit(std::vector<double>(c.data(), c.data() + c.size()), lo, hi);
}

std::vector<double> normalize_by_empty_beam(std::span<const double> xi,
                                            std::span<const double> p_sample,
                                            const ChebyshevFit& empty_beam) {
  if (xi.size() != p_sample.size()) throw std::invalid_argument("normalize_by_empty_beam: size mismatch");
  std::vector<double> out(xi.size());
  for (std::size_t i = 0; i < xi.size(); ++i) {
    const double p0 = empty_beam(xi[i]);
    if (p0 == 0.0) throw std::invalid_argument("normalize_by_empty_beam: empty-beam fit vanishes");
    out[i] = p_sample[i] / p0;
  }
  return out;
}

}  // namespace vortex
