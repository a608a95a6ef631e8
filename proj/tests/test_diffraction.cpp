#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstring>
#include <numbers>
#include <stdexcept>
#include <sstream>

#include "vortex/diffraction.hpp"
#include "vortex/specfun.hpp"

using namespace vortex;
using std::numbers::pi;

namespace {

DiffractionPattern pattern(GratingSpec s, int spp, int padding, double lambda = 0.4, bool apodize = false) {
  const auto g = grid_for(s, spp);
  return diffraction_pattern(phase_map(s, lambda, g.nx, g.ny), {padding, apodize});
}

int index_of(const std::vector<double>& axis, double q, double dq) {
  return static_cast<int>(std::lround(q / dq)) + static_cast<int>(axis.size()) / 2;
}

}  // namespace

TEST_SUITE("diffraction") {

TEST_CASE("transmitted amplitude") {
  const double rho = kSiliconSld;
  CHECK(std::abs(transmitted_amplitude(rho, 0.4, pi / (rho * 0.4))) < 1e-15);
  CHECK(transmitted_amplitude(rho, 0.4, 0.0) == std::complex<double>(1.0, 0.0));
  const auto h = transmitted_amplitude(rho, 0.4, 0.5 * pi / (rho * 0.4));
  CHECK(h.real() == doctest::Approx(0.5));
  CHECK(h.imag() == doctest::Approx(-0.5));
  CHECK(std::norm(h) == doctest::Approx(0.5));
  for (double k : {0.3, 1.0, 2.2})
    CHECK(std::abs(transmitted_amplitude(1.0, 1.0, k) - 0.5 * (std::polar(1.0, -k) + 1.0)) < 1e-15);
}

TEST_CASE("order weights") {
  const double rho = kSiliconSld;
  const double dpi = pi / (rho * 0.4);
  CHECK(std::abs(order_weight(2, rho, 0.4, 1234.0)) == 0.0);
  const auto w1 = order_weight(1, rho, 0.4, dpi);
  CHECK(w1.real() == doctest::Approx(-2.0 / pi));
  CHECK(std::abs(w1.imag()) < 1e-15);
  CHECK(std::abs(order_weight(1, rho, 0.4, 0.0)) == 0.0);
  double last = 1.0;
  for (int n = 1; n < 30; n += 2) {
    const double m = std::abs(order_weight(n, rho, 0.4, 5500.0));
    CHECK(m <= last);
    last = m;
    const auto ref = 0.5 * (std::polar(1.0, -rho * 0.4 * 5500.0) - 1.0) * (std::sin(n * pi / 2) / (n * pi / 2));
    CHECK(std::abs(order_weight(n, rho, 0.4, 5500.0) - ref) < 1e-15);
  }
}

TEST_CASE("order angles") {
  CHECK(order_angle(1, 0.4, 2000.0) == doctest::Approx(2e-4));
  CHECK(order_angle(0, 0.4, 2000.0) == 0.0);
  CHECK(order_angle(3, 0.4, 2000.0) == doctest::Approx(3 * 2e-4));
  CHECK_THROWS_AS(order_angle(1, 0.4, 0.0), std::invalid_argument);
}

TEST_CASE("Parseval holds for every pattern") {
  for (int m : {0, 1, 3})
    for (int pad : {1, 2})
      for (bool apod : {false, true}) {
        GratingSpec s;
        s.charge = m;
        s.profile = m == 3 ? GrooveProfile::triangular : GrooveProfile::rectangular;
        CHECK(parseval_residual(pattern(s, 16, pad, 0.4, apod)) < 1e-6);
      }
}

TEST_CASE("intensity is the squared amplitude") {
  GratingSpec s;
  const auto dp = pattern(s, 16, 1);
  for (std::size_t i = 0; i < dp.intensity.size(); i += 97) CHECK(dp.intensity[i] == std::norm(dp.amplitude[i]));
}

TEST_CASE("no phase means only the transmitted beam") {
  GratingSpec s;
  s.depth_nm = 0.0;
  const auto dp = pattern(s, 16, 1);
  const double centre = dp.intensity_at(dp.center_x(), dp.center_y());
  double other = 0.0;
  for (int iy = 0; iy < dp.ny; ++iy)
    for (int ix = 0; ix < dp.nx; ++ix)
      if (ix != dp.center_x() || iy != dp.center_y()) other = std::max(other, dp.intensity_at(ix, iy));
  CHECK(other < 1e-20 * centre);
  // (2 pi / lambda)^2 A^2 / (dqx dqy) ... all of the Parseval mass sits in one pixel
  CHECK(centre * dp.dqx * dp.dqy == doctest::Approx(std::pow(2 * pi / 0.4, 2) * 1e8));
}

TEST_CASE("straight grating: odd orders only") {
  GratingSpec s;
  s.charge = 0;
  s.hole_radius_nm = 0.0;
  const auto dp = pattern(s, 32, 1);
  const int cy = dp.center_y();
  auto at = [&](int n) { return dp.intensity_at(index_of(dp.qx_axis, 2 * pi * n / s.period_nm, dp.dqx), cy); };
  CHECK(at(1) > 0.0);
  CHECK(at(2) < 1e-6 * at(1));
  CHECK(at(4) < 1e-6 * at(1));
  // sampled square wave: coefficient ratio of the discrete transform
  const double r = std::sin(pi / 32) / std::sin(3 * pi / 32);
  CHECK(at(3) == doctest::Approx(at(1) * r * r).epsilon(1e-9));
}

TEST_CASE("charge one: dark order centre inside a bright ring") {
  GratingSpec s;
  const auto dp = pattern(s, 16, 4);
  const int cx = index_of(dp.qx_axis, 2 * pi / s.period_nm, dp.dqx);
  const double centre = dp.intensity_at(cx, dp.center_y());
  const auto prof = radial_profile(dp, 1, 1, 16);
  const double peak = *std::max_element(prof.intensity.begin(), prof.intensity.end());
  CHECK(centre < 0.05 * peak);
  const auto r = donut_peak_radius(prof);
  REQUIRE(r.has_value());
  CHECK(*r > 0.0);
  CHECK(*r < pi / s.period_nm);
}

TEST_CASE("charge zero: profile peaks at the order centre") {
  GratingSpec s;
  s.charge = 0;
  const auto dp = pattern(s, 16, 4);
  const auto prof = radial_profile(dp, 1, 1, 16);
  CHECK(std::max_element(prof.intensity.begin(), prof.intensity.end()) == prof.intensity.begin());
  CHECK_FALSE(donut_peak_radius(prof).has_value());
}

TEST_CASE("conjugate orders carry equal power") {
  for (int m : {1, 2, 3}) {
    GratingSpec s;
    s.charge = m;
    const auto dp = pattern(s, 32, 1);
    for (int n : {1, 3}) {
      const double a = annulus_integral(dp, n, 1);
      const double b = annulus_integral(dp, n, -1);
      CHECK(std::abs(a - b) / a < 1e-6);
    }
  }
}

TEST_CASE("first order dominates the third") {
  for (int m : {1, 2, 3}) {
    GratingSpec s;
    s.charge = m;
    const auto dp = pattern(s, 32, 1);
    CHECK(annulus_integral(dp, 3, 1) <= 1.2 / 9.0 * annulus_integral(dp, 1, 1));
  }
}

TEST_CASE("grid refinement changes the first-order power by < 1%") {
  GratingSpec s;
  const double a = annulus_integral(pattern(s, 16, 1), 1, 1);
  const double b = annulus_integral(pattern(s, 32, 1), 1, 1);
  CHECK(std::abs(a - b) / b < 0.01);
}

TEST_CASE("numeric donut profile agrees with the analytic form") {
  // pi grating so the transmitted beam vanishes
  for (int m : {1, 2, 3}) {
    CAPTURE(m);
    GratingSpec s;
    s.charge = m;
    s.depth_nm = 38000.0;
    const auto dp = pattern(s, 32, 16);
    const auto prof = radial_profile(dp, 1, 1, 40);

    DonutParams p;
    p.order_n = 1;
    p.charge_m = m;
    p.regulator_R = s.plaquette_w_nm / std::sqrt(pi);
    p.contrast = std::polar(1.0, -s.phase_contrast(0.4)) - 1.0;
    const auto ana = donut_profile(p, prof.q_prime);
    const double amax = *std::max_element(ana.intensity.begin(), ana.intensity.end());
    const double nmax = *std::max_element(prof.intensity.begin(), prof.intensity.end());
    const auto apeak = std::max_element(ana.intensity.begin(), ana.intensity.end()) - ana.intensity.begin();
    std::size_t first_min = static_cast<std::size_t>(apeak);
    while (first_min + 1 < ana.intensity.size() && ana.intensity[first_min + 1] < ana.intensity[first_min])
      ++first_min;
    double worst = 0.0;
    for (std::size_t b = 0; b <= first_min; ++b)
      worst = std::max(worst, std::abs(prof.intensity[b] / nmax - ana.intensity[b] / amax));
    CHECK(worst < 0.1);
  }
}

TEST_CASE("profile and annulus reject orders outside the q grid") {
  GratingSpec s;
  const auto dp = pattern(s, 8, 1);  // q range +-4 orders
  CHECK_THROWS_AS(radial_profile(dp, 5, 1, 16), std::invalid_argument);
  CHECK_THROWS_AS(annulus_integral(dp, 5, -1), std::invalid_argument);
  CHECK_THROWS_AS(radial_profile(dp, 1, 0, 16), std::invalid_argument);
  const auto prof = radial_profile(dp, 1, 1, 4);
  CHECK_THROWS_AS(donut_peak_radius(prof), std::invalid_argument);
}

TEST_CASE("non-finite phases are rejected") {
  GratingSpec s;
  auto pm = phase_map(s, 0.4, 80, 80);
  pm.values[10] = std::nan("");
  CHECK_THROWS_AS(diffraction_pattern(pm), std::invalid_argument);
  pm.values[10] = 0.0;
  CHECK_THROWS_AS(diffraction_pattern(pm, {0, false}), std::invalid_argument);
}

TEST_CASE("binary grid round trip and CSV header") {
  GratingSpec s;
  const auto dp = pattern(s, 8, 1);
  std::stringstream ss;
  write_grid(ss, dp);
  CHECK(ss.str().size() == 8 * (5 + dp.intensity.size()));
  // little-endian header: first field is nx as float64
  double nx = 0.0;
  std::memcpy(&nx, ss.str().data(), 8);
  CHECK(nx == dp.nx);
  const auto g = read_grid(ss);
  CHECK(g.nx == dp.nx);
  CHECK(g.ny == dp.ny);
  CHECK(g.dqx == dp.dqx);
  CHECK(g.lambda_nm == dp.lambda_nm);
  CHECK(g.intensity == dp.intensity);

  std::ostringstream os;
  write_csv(os, radial_profile(dp, 1, 1, 8));
  CHECK(os.str().rfind("q_prime,intensity,count,empty\n", 0) == 0);
}

}  // TEST_SUITE
