#include "vortex/diffraction.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <istream>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include "fft.hpp"
#include "vortex/export.hpp"

namespace vortex {

using std::numbers::pi;

std::complex<double> transmitted_amplitude(double rho, double lambda_nm, double depth_nm) {
  const double kappa = rho * lambda_nm * depth_nm;
  if (!std::isfinite(kappa)) throw std::invalid_argument("transmitted_amplitude: non-finite input");
  // (e^{-i k} + 1) / 2 = e^{-i k/2} cos(k/2)
  return std::polar(std::cos(0.5 * kappa), -0.5 * kappa);
}

std::complex<double> order_weight(int n, double rho, double lambda_nm, double depth_nm) {
  const double kappa = rho * lambda_nm * depth_nm;
  if (!std::isfinite(kappa)) throw std::invalid_argument("order_weight: non-finite input");
  // (e^{-i k} - 1) / 2 = -i e^{-i k/2} sin(k/2)
  const std::complex<double> half_contrast =
      std::complex<double>(0.0, -1.0) * std::polar(std::sin(0.5 * kappa), -0.5 * kappa);
  return half_contrast * fourier_weight(n);
}

double order_angle(int n, double lambda_nm, double period_nm) {
  if (!(period_nm > 0.0)) throw std::invalid_argument("order_angle: period must be positive");
  return n * lambda_nm / period_nm;
}

namespace {

double hann(int i, int n) {
  const double s = std::sin(pi * (i + 0.5) / n);
  return s * s;
}

std::vector<double> centred_axis(int n, double dq) {
  std::vector<double> axis(n);
  for (int j = 0; j < n; ++j) axis[j] = (j - n / 2) * dq;
  return axis;
}

}  // namespace

DiffractionPattern diffraction_pattern(const PhaseMap& pm, const DiffractionOptions& options) {
  if (options.padding < 1) throw std::invalid_argument("diffraction_pattern: padding must be >= 1");
  if (pm.nx < 1 || pm.ny < 1 || pm.values.size() != static_cast<std::size_t>(pm.nx) * pm.ny)
    throw std::invalid_argument("diffraction_pattern: malformed phase map");
  for (double v : pm.values)
    if (!std::isfinite(v)) throw std::invalid_argument("diffraction_pattern: non-finite phase value");

  const int Nx = pm.nx * options.padding;
  const int Ny = pm.ny * options.padding;
  detail::cvec buf(static_cast<std::size_t>(Nx) * Ny);

  double norm = 0.0;
  for (int iy = 0; iy < pm.ny; ++iy) {
    const double wy = options.apodize ? hann(iy, pm.ny) : 1.0;
    for (int ix = 0; ix < pm.nx; ++ix) {
      const double w = options.apodize ? wy * hann(ix, pm.nx) : 1.0;
      buf[static_cast<std::size_t>(iy) * Nx + ix] = std::polar(w, pm.at(ix, iy));
      norm += w * w;
    }
  }
  norm *= pm.dx * pm.dy;

  detail::fft_2d(buf, Nx, Ny, detail::FftDirection::forward);

  DiffractionPattern dp;
  dp.nx = Nx;
  dp.ny = Ny;
  dp.dqx = 2.0 * pi / (Nx * pm.dx);
  dp.dqy = 2.0 * pi / (Ny * pm.dy);
  dp.qx_axis = centred_axis(Nx, dp.dqx);
  dp.qy_axis = centred_axis(Ny, dp.dqy);
  dp.lambda_nm = pm.lambda_nm;
  dp.field_norm = norm;
  dp.source_spec = pm.spec;

  // First cell centre relative to the map centre.
  const double x0 = -0.5 * pm.extent_x() + 0.5 * pm.dx;
  const double y0 = -0.5 * pm.extent_y() + 0.5 * pm.dy;
  const std::complex<double> scale(0.0, -pm.dx * pm.dy / pm.lambda_nm);

  std::vector<std::complex<double>> shift_x(Nx), shift_y(Ny);
  for (int j = 0; j < Nx; ++j) shift_x[j] = std::polar(1.0, -dp.qx_axis[j] * x0);
  for (int j = 0; j < Ny; ++j) shift_y[j] = std::polar(1.0, -dp.qy_axis[j] * y0);

  const std::size_t total = static_cast<std::size_t>(Nx) * Ny;
  dp.amplitude.resize(total);
  dp.intensity.resize(total);
  for (int jy = 0; jy < Ny; ++jy) {
    const int ky = (jy + Ny - Ny / 2) % Ny;  // unshifted DFT row
    for (int jx = 0; jx < Nx; ++jx) {
      const int kx = (jx + Nx - Nx / 2) % Nx;
      const auto a = scale * shift_x[jx] * shift_y[jy] * buf[static_cast<std::size_t>(ky) * Nx + kx];
      const std::size_t out = static_cast<std::size_t>(jy) * Nx + jx;
      dp.amplitude[out] = a;
      dp.intensity[out] = std::norm(a);
    }
  }
  return dp;
}

double parseval_residual(const DiffractionPattern& dp) {
  double sum = 0.0;
  for (double v : dp.intensity) sum += v;
  sum *= dp.dqx * dp.dqy;
  const double k = 2.0 * pi / dp.lambda_nm;
  const double expected = k * k * dp.field_norm;
  return std::abs(sum - expected) / expected;
}

bool RadialProfile::has_empty_bins() const {
  return std::any_of(counts.begin(), counts.end(), [](std::size_t c) { return c == 0; });
}

namespace {

double order_center(const DiffractionPattern& dp, int n, int side) {
  if (side != 1 && side != -1) throw std::invalid_argument("order side must be +1 or -1");
  return side * 2.0 * pi * n / dp.source_spec.period_nm;
}

// Pixel range along one axis within [c - r, c + r].
std::pair<int, int> pixel_span(double c, double r, double dq, int n) {
  const int lo = std::max(0, static_cast<int>(std::floor((c - r) / dq)) + n / 2);
  const int hi = std::min(n - 1, static_cast<int>(std::ceil((c + r) / dq)) + n / 2);
  return {lo, hi};
}

void check_order_inside(const DiffractionPattern& dp, double cx, double rmax) {
  const double qx_lo = dp.qx_axis.front(), qx_hi = dp.qx_axis.back();
  const double qy_lo = dp.qy_axis.front(), qy_hi = dp.qy_axis.back();
  if (cx - rmax < qx_lo || cx + rmax > qx_hi || -rmax < qy_lo || rmax > qy_hi)
    throw std::invalid_argument("order annulus extends beyond the sampled q range");
}

}  // namespace

RadialProfile radial_profile(const DiffractionPattern& dp, int n, int side, int nbins) {
  if (nbins < 1) throw std::invalid_argument("radial_profile: nbins must be positive");
  const double cx = order_center(dp, n, side);
  const double rmax = pi / dp.source_spec.period_nm;
  check_order_inside(dp, cx, rmax);

  RadialProfile prof;
  prof.order_n = n;
  prof.side = side;
  prof.center_qx = cx;
  prof.bin_width = rmax / nbins;
  prof.q_prime.resize(nbins);
  prof.intensity.assign(nbins, 0.0);
  prof.counts.assign(nbins, 0);
  for (int b = 0; b < nbins; ++b) prof.q_prime[b] = (b + 0.5) * prof.bin_width;

  const auto [x_lo, x_hi] = pixel_span(cx, rmax, dp.dqx, dp.nx);
  const auto [y_lo, y_hi] = pixel_span(0.0, rmax, dp.dqy, dp.ny);
  for (int iy = y_lo; iy <= y_hi; ++iy) {
    const double qy = dp.qy_axis[iy];
    for (int ix = x_lo; ix <= x_hi; ++ix) {
      const double r = std::hypot(dp.qx_axis[ix] - cx, qy);
      if (r >= rmax) continue;
      const auto b = std::min(nbins - 1, static_cast<int>(r / prof.bin_width));
      prof.intensity[b] += dp.intensity_at(ix, iy);
      ++prof.counts[b];
    }
  }
  for (int b = 0; b < nbins; ++b)
    if (prof.counts[b] > 0) prof.intensity[b] /= static_cast<double>(prof.counts[b]);
  return prof;
}

std::optional<double> donut_peak_radius(const RadialProfile& profile) {
  const std::size_t nb = profile.q_prime.size();
  if (nb < 8) throw std::invalid_argument("donut_peak_radius: profile needs at least 8 bins");

  std::size_t first = nb, last = 0, best = nb;
  for (std::size_t b = 0; b < nb; ++b) {
    if (profile.empty_bin(b)) continue;
    first = std::min(first, b);
    last = b;
    if (best == nb || profile.intensity[b] > profile.intensity[best]) best = b;
  }
  if (best == nb || best == first || best == last) return std::nullopt;

  const double q0 = profile.q_prime[best];
  if (profile.empty_bin(best - 1) || profile.empty_bin(best + 1)) return q0;
  const double ym = profile.intensity[best - 1];
  const double y0 = profile.intensity[best];
  const double yp = profile.intensity[best + 1];
  const double curvature = ym - 2.0 * y0 + yp;
  if (curvature >= 0.0) return q0;
  const double offset = 0.5 * (ym - yp) / curvature;
  return q0 + std::clamp(offset, -0.5, 0.5) * profile.bin_width;
}

double annulus_integral(const DiffractionPattern& dp, int n, int side) {
  const double cx = order_center(dp, n, side);
  const double rmax = pi / dp.source_spec.period_nm;
  check_order_inside(dp, cx, rmax);
  const auto [x_lo, x_hi] = pixel_span(cx, rmax, dp.dqx, dp.nx);
  const auto [y_lo, y_hi] = pixel_span(0.0, rmax, dp.dqy, dp.ny);
  double sum = 0.0;
  for (int iy = y_lo; iy <= y_hi; ++iy)
    for (int ix = x_lo; ix <= x_hi; ++ix)
      if (std::hypot(dp.qx_axis[ix] - cx, dp.qy_axis[iy]) < rmax) sum += dp.intensity_at(ix, iy);
  return sum * dp.dqx * dp.dqy;
}

namespace {

void put_le(std::ostream& os, double v) {
  auto bits = std::bit_cast<std::uint64_t>(v);
  char bytes[8];
  for (int i = 0; i < 8; ++i) bytes[i] = static_cast<char>((bits >> (8 * i)) & 0xff);
  os.write(bytes, 8);
}

double get_le(std::istream& is) {
  unsigned char bytes[8];
  if (!is.read(reinterpret_cast<char*>(bytes), 8)) throw std::runtime_error("read_grid: truncated file");
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
  return std::bit_cast<double>(bits);
}

}  // namespace

void write_grid(std::ostream& os, const DiffractionPattern& dp) {
  put_le(os, dp.nx);
  put_le(os, dp.ny);
  put_le(os, dp.dqx);
  put_le(os, dp.dqy);
  put_le(os, dp.lambda_nm);
  for (double v : dp.intensity) put_le(os, v);
}

GridFile read_grid(std::istream& is) {
  GridFile g;
  g.nx = static_cast<int>(get_le(is));
  g.ny = static_cast<int>(get_le(is));
  g.dqx = get_le(is);
  g.dqy = get_le(is);
  g.lambda_nm = get_le(is);
  if (g.nx < 1 || g.ny < 1) throw std::runtime_error("read_grid: bad dimensions");
  g.intensity.resize(static_cast<std::size_t>(g.nx) * g.ny);
  for (auto& v : g.intensity) v = get_le(is);
  return g;
}

void write_csv(std::ostream& os, const RadialProfile& profile) {
  os << "q_prime,intensity,count,empty\n";
  for (std::size_t b = 0; b < profile.q_prime.size(); ++b) {
    os << format_double(profile.q_prime[b]) << ',' << format_double(profile.intensity[b]) << ','
       << profile.counts[b] << ',' << (profile.empty_bin(b) ? 1 : 0) << '\n';
  }
}

}  // namespace vortex
