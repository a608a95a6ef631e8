#include "vortex/specfun.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <string>

#include "vortex/error.hpp"
#include "vortex/export.hpp"
#include "vortex/grating.hpp"

namespace vortex {

using std::numbers::pi;

namespace {

// Extended precision for series that cancel heavily.
#if defined(__SIZEOF_FLOAT128__)
using wide = __float128;
constexpr double kWideEpsilon = 1.93e-34;
inline wide wide_abs(wide v) { return v < 0 ? -v : v; }
#else
using wide = long double;
constexpr double kWideEpsilon = static_cast<double>(std::numeric_limits<long double>::epsilon());
inline wide wide_abs(wide v) { return std::fabs(v); }
#endif

const wide kWidePi = static_cast<wide>(3.141592653589793) + static_cast<wide>(1.2246467991473532e-16);

constexpr int kMaxBesselOrder = 64;
constexpr double kMaxBesselArg = 1e4;
constexpr double kMaxStruveArg = 1e3;
constexpr double kStruveSeriesLimit = 40.0;
constexpr double kMaxHypArg = 1e4;
constexpr int kMaxSeriesTerms = 10000;

// Ascending series; only used where every term ratio is below one.
double bessel_j_series(int n, double x) {
  double t = 1.0;
  for (int i = 1; i <= n; ++i) t *= 0.5 * x / i;
  const double q = 0.25 * x * x;
  double sum = t;
  for (int k = 1; k < 500; ++k) {
    t *= -q / (static_cast<double>(k) * (k + n));
    sum += t;
    if (std::abs(t) <= 1e-17 * std::abs(sum)) break;
  }
  return sum;
}

// Miller's downward recurrence normalised by J0 + 2 sum J_{2k} = 1.
double bessel_j_miller(int n, double x) {
  const double top = std::max(static_cast<double>(n), x);
  int start = static_cast<int>(top + 30.0 + std::sqrt(400.0 * top));
  start += start % 2;

  constexpr double kBig = 1e250;
  double next = 0.0;  // J_{k+1}
  double cur = 1e-300;  // J_k
  double norm = 0.0;
  double result = 0.0;
  const double two_over_x = 2.0 / x;
  for (int k = start; k > 0; --k) {
    const double prev = k * two_over_x * cur - next;  // J_{k-1}
    next = cur;
    cur = prev;
    if (std::abs(cur) > kBig) {
      cur /= kBig;
      next /= kBig;
      norm /= kBig;
      result /= kBig;
    }
    if (k - 1 == n) result = cur;
    if ((k - 1) % 2 == 0 && k - 1 > 0) norm += 2.0 * cur;
  }
  norm += cur;  // J_0
  return result / norm;
}

}  // namespace

double sinc(double x) {
  if (x == 0.0) return 1.0;
  if (std::abs(x) < 1e-4) {
    const double x2 = x * x;
    return 1.0 - x2 / 6.0 + x2 * x2 / 120.0;
  }
  return std::sin(x) / x;
}

double bessel_j(int n, double x) {
  if (std::abs(n) > kMaxBesselOrder)
    throw std::invalid_argument("bessel_j: order outside |n| <= 64");
  if (!(x >= 0.0 && x <= kMaxBesselArg))
    throw std::invalid_argument("bessel_j: argument outside [0, 1e4]");
  if (n < 0) return (n % 2 == 0 ? 1.0 : -1.0) * bessel_j(-n, x);
  if (x == 0.0) return n == 0 ? 1.0 : 0.0;
  if (x * x < 4.0 * (n + 1)) return bessel_j_series(n, x);
  return bessel_j_miller(n, x);
}

namespace {

double struve_series(int k, double x) {
  const wide half = static_cast<wide>(x) / 2;
  const wide q = half * half;
  // H0: (x/2) / Gamma(3/2)^2 ; H1: (x/2)^2 / (Gamma(3/2) Gamma(5/2))
  wide term = k == 0 ? half * 4 / kWidePi : q * 8 / (3 * kWidePi);
  wide sum = term;
  const wide shift = k == 0 ? static_cast<wide>(1.5) : static_cast<wide>(2.5);
  for (int j = 0; j < 400; ++j) {
    term *= -q / ((j + static_cast<wide>(1.5)) * (j + shift));
    sum += term;
    if (j > x && wide_abs(term) < static_cast<wide>(1e-30) * wide_abs(sum)) break;
  }
  return static_cast<double>(sum);
}

// Hankel expansion P, Q of Y_nu for large x.
void hankel_pq(int nu, double x, double& p, double& q) {
  const double mu = 4.0 * nu * nu;
  double a = 1.0;
  p = 1.0;
  q = 0.0;
  double last = 1.0;
  for (int k = 1; k < 60; ++k) {
    const double odd = 2.0 * k - 1.0;
    a *= (mu - odd * odd) / (k * 8.0 * x);
    if (std::abs(a) > last) break;  // asymptotic series started to diverge
    last = std::abs(a);
    const int r = k % 4;
    // k = 1: +Q, k = 2: -P, k = 3: -Q, k = 4: +P ...
    if (r == 1) q += a;
    else if (r == 2) p -= a;
    else if (r == 3) q -= a;
    else p += a;
    if (last < 1e-17) break;
  }
}

double bessel_y_asymptotic(int nu, double x) {
  double p, q;
  hankel_pq(nu, x, p, q);
  const double chi = x - (0.5 * nu + 0.25) * pi;
  return std::sqrt(2.0 / (pi * x)) * (p * std::sin(chi) + q * std::cos(chi));
}

// H_nu - Y_nu for large x.
double struve_minus_y(int nu, double x) {
  const double inv2 = 1.0 / (x * x);
  double term = nu == 0 ? 2.0 / (pi * x) : 2.0 / pi;
  double sum = term;
  double last = std::abs(term);
  for (int k = 0; k < 60; ++k) {
    const double kh = k + 0.5;
    const double ratio = nu == 0 ? -(2.0 * k + 1.0) * (2.0 * k + 1.0) * inv2 : kh * (0.5 - k) * 4.0 * inv2;
    term *= ratio;
    if (std::abs(term) > last) break;
    last = std::abs(term);
    sum += term;
    if (last < 1e-17 * std::abs(sum)) break;
  }
  return sum;
}

}  // namespace

double struve_h(int k, double x) {
  if (k != 0 && k != 1) throw std::invalid_argument("struve_h: only orders 0 and 1 are supported");
  if (!(x >= 0.0 && x <= kMaxStruveArg))
    throw std::invalid_argument("struve_h: argument outside [0, 1e3]");
  if (x == 0.0) return 0.0;
  if (x <= kStruveSeriesLimit) return struve_series(k, x);
  return bessel_y_asymptotic(k, x) + struve_minus_y(k, x);
}

namespace {

bool is_nonpositive_integer(double b) { return b <= 0.0 && b == std::floor(b); }

}  // namespace

double hyp1f2(double a, double b1, double b2, double z) {
  if (!std::isfinite(a) || !std::isfinite(b1) || !std::isfinite(b2) || !std::isfinite(z))
    throw std::invalid_argument("hyp1f2: non-finite argument");
  if (is_nonpositive_integer(b1) || is_nonpositive_integer(b2))
    throw std::invalid_argument("hyp1f2: lower parameters must not be non-positive integers");
  if (std::abs(z) > kMaxHypArg) throw std::invalid_argument("hyp1f2: |z| > 1e4");
  if (z == 0.0) return 1.0;

  const wide wz = z;
  wide term = 1;
  wide sum = 1;
  wide largest = 1;
  for (int k = 0; k < kMaxSeriesTerms; ++k) {
    term *= (a + k) * wz / ((static_cast<wide>(b1) + k) * (static_cast<wide>(b2) + k) * (k + 1));
    sum += term;
    largest = std::max(largest, wide_abs(term));
    if (term == 0) return static_cast<double>(sum);
    // Stop only once the terms are shrinking.
    const double ratio = std::abs((a + k + 1) * z / ((b1 + k + 1) * (b2 + k + 1) * (k + 2)));
    if (ratio < 1.0 && wide_abs(term) <= static_cast<wide>(1e-18) * wide_abs(sum)) {
      const double lost = static_cast<double>(largest) * kWideEpsilon * (k + 1);
      if (lost > 1e-10)
        throw NumericalError("hyp1f2: series cancellation exceeds working precision");
      return static_cast<double>(sum);
    }
  }
  throw NumericalError("hyp1f2: series did not converge within 10000 terms");
}

namespace {

void check_moment_args(int n, double q, double R) {
  if (std::abs(n) > kMaxBesselOrder) throw std::invalid_argument("bessel_moment: |n| > 64");
  if (!(q >= 0.0) || !std::isfinite(q)) throw std::invalid_argument("bessel_moment: q must be >= 0");
  if (!(R > 0.0) || !std::isfinite(R)) throw std::invalid_argument("bessel_moment: R must be > 0");
}

double order_sign(int n) { return (n < 0 && n % 2 != 0) ? -1.0 : 1.0; }

double moment_series(int L, double u, double R) {
  // R^2 (u/2)^L / L! * 1F2(...) / (2 + L)
  wide scale = static_cast<wide>(R) * R;
  for (int i = 1; i <= L; ++i) scale *= static_cast<wide>(u) / (2 * i);
  const double f = hyp1f2(1.0 + 0.5 * L, 2.0 + 0.5 * L, 1.0 + L, -0.25 * u * u);
  return static_cast<double>(scale * f / (2 + L));
}

// I_L(u) = int_0^u t J_L(t) dt by the recurrence t J_L = 2 (L-1) J_{L-1} - t J_{L-2}.
double moment_reduced_unit(int L, double u) {
  const double j0 = bessel_j(0, u);
  const double j1 = bessel_j(1, u);
  if (L == 0) return u * j1;

  double i_prev;  // I_{L-2} chain start
  double k_prev;  // K_{start}: integral of J_{start}
  int k_order;
  if (L % 2 == 0) {
    i_prev = u * j1;    // I_0
    k_prev = 1.0 - j0;  // K_1
    k_order = 1;
  } else {
    const double h0 = struve_h(0, u);
    const double h1 = struve_h(1, u);
    i_prev = 0.5 * pi * u * (j1 * h0 - j0 * h1);  // I_1
    if (L == 1) return i_prev;
    k_prev = u * j0 + i_prev;                     // K_0
    k_order = 0;
  }
  // Advance K_k to K_{L-1} in steps of two: K_{k+2} = K_k - 2 J_{k+1}.
  double i_cur = i_prev;
  for (int l = (L % 2 == 0) ? 2 : 3; l <= L; l += 2) {
    while (k_order < l - 1) {
      k_prev -= 2.0 * bessel_j(k_order + 1, u);
      k_order += 2;
    }
    i_cur = 2.0 * (l - 1) * k_prev - i_cur;
  }
  return i_cur;
}

}  // namespace

double bessel_moment(int n, double q, double R) {
  check_moment_args(n, q, R);
  const int L = std::abs(n);
  if (q == 0.0) return L == 0 ? 0.5 * R * R : 0.0;
  const double u = q * R;
  if (u <= kStruveSeriesLimit) return order_sign(n) * moment_series(L, u, R);
  return order_sign(n) * moment_reduced_unit(L, u) / (q * q);
}

double bessel_moment_reduced(int n, double q, double R) {
  check_moment_args(n, q, R);
  const int L = std::abs(n);
  if (q == 0.0) return L == 0 ? 0.5 * R * R : 0.0;
  return order_sign(n) * moment_reduced_unit(L, q * R) / (q * q);
}

namespace {

std::complex<double> i_power(int L) {
  switch (((L % 4) + 4) % 4) {
    case 0: return {1.0, 0.0};
    case 1: return {0.0, 1.0};
    case 2: return {-1.0, 0.0};
    default: return {0.0, -1.0};
  }
}

void check_donut(const DonutParams& p) {
  if (p.order_n < 1) throw std::invalid_argument("donut: order n must be >= 1");
  if (p.side != 1 && p.side != -1) throw std::invalid_argument("donut: side must be +1 or -1");
  const long nm = static_cast<long>(p.order_n) * p.charge_m;
  if (nm == 0)
    throw std::invalid_argument("donut: n m = 0 has no vortex; use the ordinary grating orders");
  if (std::abs(nm) > kMaxDonutOrder) throw std::invalid_argument("donut: |n m| > 32");
  if (!(p.regulator_R > 0.0) || !std::isfinite(p.regulator_R))
    throw std::invalid_argument("donut: regulator R must be positive");
  if (!(p.lambda_nm > 0.0)) throw std::invalid_argument("donut: wavelength must be positive");
}

std::complex<double> order_prefactor(const DonutParams& p) {
  // A_n = (-i pi / lambda) (contrast / 2) sinc(n pi / 2)
  return std::complex<double>(0.0, -pi / p.lambda_nm) * (0.5 * p.contrast) * fourier_weight(p.order_n);
}

}  // namespace

std::complex<double> donut_amplitude(const DonutParams& params, double q_prime, double phi_prime) {
  check_donut(params);
  if (!(q_prime >= 0.0) || !std::isfinite(q_prime))
    throw std::invalid_argument("donut: q' must be >= 0");
  const int L = params.side * params.order_n * params.charge_m;
  const double moment = bessel_moment(L, q_prime, params.regulator_R);
  return order_prefactor(params) * i_power(L) * std::polar(moment, -L * phi_prime);
}

double donut_intensity_prefactor(const DonutParams& params) {
  check_donut(params);
  const int L = std::abs(params.order_n * params.charge_m);
  double denom = std::ldexp(1.0, L + 1) * (2 + L);
  for (int i = 2; i <= L; ++i) denom *= i;
  const double R2 = params.regulator_R * params.regulator_R;
  const std::complex<double> c =
      pi * R2 / params.lambda_nm * params.contrast * fourier_weight(params.order_n) / denom;
  return std::norm(c);
}

double min_vortex_radius(int m, double lambda_nm) {
  if (m < 0) throw std::invalid_argument("min_vortex_radius: charge must be >= 0");
  if (!(lambda_nm > 0.0)) throw std::invalid_argument("min_vortex_radius: wavelength must be positive");
  return m * lambda_nm / (2.0 * pi);
}

int DonutProfile::azim_phase_sign() const {
  const int nm = params.order_n * params.charge_m;
  return nm > 0 ? -params.side : params.side;
}

DonutProfile donut_profile(const DonutParams& params, std::span<const double> q_prime) {
  check_donut(params);
  DonutProfile out;
  out.params = params;
  out.q_prime.assign(q_prime.begin(), q_prime.end());
  out.amplitude.reserve(q_prime.size());
  out.intensity.reserve(q_prime.size());
  for (double q : q_prime) {
    const auto a = donut_amplitude(params, q, 0.0);
    out.amplitude.push_back(a);
    out.intensity.push_back(std::norm(a));
  }
  return out;
}

void write_csv(std::ostream& os, const DonutProfile& profile) {
  os << "q_prime,intensity,re_amplitude,im_amplitude\n";
  for (std::size_t i = 0; i < profile.q_prime.size(); ++i) {
    os << format_double(profile.q_prime[i]) << ',' << format_double(profile.intensity[i]) << ','
       << format_double(profile.amplitude[i].real()) << ','
       << format_double(profile.amplitude[i].imag()) << '\n';
  }
}

std::string regulator_warning(double regulator_R, double period_nm, int abs_nm) {
  if (abs_nm <= 0 || !(period_nm > 0.0)) return {};
  const double limit = abs_nm * period_nm / pi;
  if (regulator_R < limit) {
    return "regulator R = " + format_double(regulator_R) + " is below |nm| p / pi = " +
           format_double(limit) + "; neighbouring donuts overlap and the single-order estimate "
           "is unreliable";
  }
  return {};
}

}  // namespace vortex
