#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "vortex/depth_fit.hpp"
#include "vortex/instrument.hpp"

using namespace vortex;
using std::numbers::pi;

namespace {

// T_k(t) by the trigonometric definition.
double cheb(int k, double t) { return std::cos(k * std::acos(std::clamp(t, -1.0, 1.0))); }

SesansCurve synthetic(const GratingSpec& spec, const InstrumentConfig& inst, int n, double noise, unsigned seed) {
  std::vector<double> lambdas(n);
  for (int i = 0; i < n; ++i) lambdas[i] = inst.band_nm[0] + (inst.band_nm[1] - inst.band_nm[0]) * i / (n - 1);
  auto c = depth_model(spec, inst, 0.0, lambdas, 16);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, noise);
  if (noise > 0.0)
    for (auto& p : c.pol) p += g(rng);
  return c;
}

}  // namespace

TEST_SUITE("instrument") {

TEST_CASE("entanglement constant") {
  const double xi0 = entanglement_constant(2e6, 1.2, 40.0 * pi / 180.0);
  CHECK(xi0 == doctest::Approx(1.446e4).epsilon(1e-3));
  CHECK(std::abs(xi0 - 1.37e4) / 1.37e4 < 0.10);
  CHECK(entanglement_constant(4e6, 1.2, 0.7) == doctest::Approx(2.0 * entanglement_constant(2e6, 1.2, 0.7)));
  const double at45 = entanglement_constant(2e6, 1.2, pi / 4);
  CHECK(at45 == doctest::Approx(2.0 * constants::kNeutronMass * 2e6 * 1.2 / constants::kPlanck * 1e-9).epsilon(1e-15));
  double last = INFINITY;
  for (double t = 0.05; t < 1.55; t += 0.05) {
    const double v = entanglement_constant(2e6, 1.2, t);
    CHECK(v < last);
    last = v;
  }
  CHECK_THROWS_AS(entanglement_constant(2e6, 1.2, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(entanglement_constant(2e6, 1.2, pi / 2), std::invalid_argument);
  CHECK_THROWS_AS(entanglement_constant(-1.0, 1.2, 0.7), std::invalid_argument);
  InstrumentConfig c;
  CHECK(c.computed_xi0() == doctest::Approx(xi0));
}

TEST_CASE("xi mapping") {
  CHECK(xi_of_lambda(1.37e4, 0.3) == doctest::Approx(1233.0));
  CHECK(xi_of_lambda(1.37e4, 1.05) == doctest::Approx(15104.25));
  CHECK(xi_of_lambda(1.37e4, 0.0) == 0.0);
  double last = -1.0;
  for (double l = 0.0; l < 2.0; l += 0.01) {
    CHECK(xi_of_lambda(1.37e4, l) > last);
    last = xi_of_lambda(1.37e4, l);
    CHECK(lambda_of_xi(1.37e4, last) == doctest::Approx(l));
  }
}

TEST_CASE("instrument validation") {
  InstrumentConfig c;
  CHECK_NOTHROW(c.validate());
  c.band_nm = {1.0, 0.5};
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = {};
  c.xi0_per_nm = 0.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = {};
  c.theta0_rad = 2.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("Chebyshev fit recovers exact series") {
  const std::vector<double> coeffs = {0.9, -0.05, 0.02, 0.013, -0.004, 0.001};
  std::vector<double> xi, p;
  for (int i = 0; i < 60; ++i) {
    const double x = 1233.0 + (15104.0 - 1233.0) * std::pow(i / 59.0, 2);
    const double t = (2 * x - (1233.0 + 15104.0)) / (15104.0 - 1233.0);
    double v = 0.0;
    for (int k = 0; k < 6; ++k) v += coeffs[k] * cheb(k, t);
    xi.push_back(x);
    p.push_back(v);
  }
  const auto fit = chebyshev_fit(xi, p);
  for (int k = 0; k < 6; ++k) CHECK(std::abs(fit.coefficients()[k] - coeffs[k]) < 1e-10);
  for (std::size_t i = 0; i < xi.size(); ++i) CHECK(fit(xi[i]) == doctest::Approx(p[i]).epsilon(1e-12));

  const std::vector<double> flat(xi.size(), 0.83);
  const auto f2 = chebyshev_fit(xi, flat);
  CHECK(f2.coefficients()[0] == doctest::Approx(0.83));
  for (int k = 1; k < 6; ++k) CHECK(std::abs(f2.coefficients()[k]) < 1e-12);
}

TEST_CASE("Chebyshev fit under noise") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g(0.0, 0.01);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> xi, p;
    for (int i = 0; i < 96; ++i) {
      xi.push_back(1000.0 + 150.0 * i);
      p.push_back(0.95 - 1e-6 * xi.back() + g(rng));
    }
    const auto fit = chebyshev_fit(xi, p);
    double ss = 0.0;
    for (std::size_t i = 0; i < xi.size(); ++i) ss += std::pow(fit(xi[i]) - p[i], 2);
    worst = std::max(worst, std::sqrt(ss / xi.size()));
  }
  CHECK(worst <= 0.015);
}

TEST_CASE("Chebyshev fit is invariant under affine maps of xi") {
  std::vector<double> xi, xi2, p;
  for (int i = 0; i < 30; ++i) {
    xi.push_back(2000.0 + 300.0 * i);
    xi2.push_back(-4.0 * xi.back() + 17.0);
    p.push_back(std::sin(1e-4 * xi.back()));
  }
  const auto a = chebyshev_fit(xi, p);
  const auto b = chebyshev_fit(xi2, p);
  // a decreasing map reverses t, so odd coefficients flip sign
  for (int k = 0; k < 6; ++k)
    CHECK(a.coefficients()[k] == doctest::Approx((k % 2 ? -1.0 : 1.0) * b.coefficients()[k]).epsilon(1e-9));
  CHECK(a.to_unit(2000.0) == -1.0);
  CHECK(a.to_unit(2000.0 + 300.0 * 29) == 1.0);
}

TEST_CASE("Chebyshev fit rejects rank-deficient designs") {
  const std::vector<double> xi = {1.0, 2.0, 3.0, 1.0, 2.0, 3.0};
  const std::vector<double> p = {1, 1, 1, 1, 1, 1};
  CHECK_THROWS_AS(chebyshev_fit(xi, p), std::invalid_argument);
  CHECK_NOTHROW(chebyshev_fit(xi, p, 2));
  CHECK_THROWS_AS(chebyshev_fit(xi, std::vector<double>{1.0}), std::invalid_argument);
}

TEST_CASE("empty-beam normalization") {
  const std::vector<double> xi = {1, 2, 3, 4, 5, 6, 7};
  const std::vector<double> p0 = {0.9, 0.9, 0.9, 0.9, 0.9, 0.9, 0.9};
  const auto fit = chebyshev_fit(xi, p0, 2);
  const std::vector<double> raw = {0.45, 0.9, 0.0, 0.3, 0.6, 0.81, 0.09};
  const auto n = normalize_by_empty_beam(xi, raw, fit);
  CHECK(n[0] == doctest::Approx(0.5));
  CHECK(n[1] == doctest::Approx(1.0));
  CHECK(n[5] == doctest::Approx(0.9));
}

TEST_CASE("depth fit recovers a noiseless depth") {
  GratingSpec s;
  InstrumentConfig inst;
  s.depth_nm = 5500.0;
  const auto data = synthetic(s, inst, 48, 0.0, 1);
  const auto r = fit_depth(data, s, inst, 3000.0, 6000.0, 16, 16);
  CHECK(std::abs(r.d_best_nm - 5500.0) < 50.0);
  CHECK(r.sse < 1e-8);
  CHECK(r.grid.size() == 16);
  CHECK_FALSE(r.flat_objective);
  CHECK_FALSE(r.contrast_free);
  // the refined depth beats every grid point
  for (const auto& p : r.grid) CHECK(p.sse >= r.sse);
}

TEST_CASE("depth fit: generating depth is the grid minimum") {
  GratingSpec s;
  InstrumentConfig inst;
  s.charge = 2;
  s.depth_nm = 4000.0;
  const auto data = synthetic(s, inst, 32, 0.0, 1);
  const auto r = fit_depth(data, s, inst, 3000.0, 6000.0, 13, 16);  // 250 nm steps, 4000 on the grid
  auto best = std::min_element(r.grid.begin(), r.grid.end(), [](auto& a, auto& b) { return a.sse < b.sse; });
  CHECK(best->d_nm == doctest::Approx(4000.0));
  CHECK(best->sse < 1e-20);
}

TEST_CASE("depth fit edge cases") {
  GratingSpec s;
  InstrumentConfig inst;
  const auto data = synthetic(s, inst, 24, 0.0, 1);
  const auto single = fit_depth(data, s, inst, 4200.0, 4200.0, 1, 16);
  CHECK(single.d_best_nm == 4200.0);
  REQUIRE(single.grid.size() == 1);
  CHECK(single.sse == single.grid[0].sse);

  auto few = data;
  few.xi_nm.resize(9);
  few.pol.resize(9);
  few.lambda_nm.resize(9);
  CHECK_THROWS_AS(fit_depth(few, s, inst, 3000.0, 6000.0, 8, 16), std::invalid_argument);
  CHECK_THROWS_AS(fit_depth(data, s, inst, 6000.0, 3000.0, 8, 16), std::invalid_argument);
  CHECK_THROWS_AS(fit_depth(data, s, inst, 3000.0, 6000.0, 1, 16), std::invalid_argument);

  // contrast-free data over a range that cannot produce contrast
  auto blank = data;
  std::fill(blank.pol.begin(), blank.pol.end(), 1.0);
  const auto r = fit_depth(blank, s, inst, 0.0, 0.0, 1, 16);
  CHECK(r.contrast_free);
  const auto flat = fit_depth(blank, s, inst, 0.0, 1e-9, 3, 16);
  CHECK(flat.flat_objective);

  // wavelengths derived from xi when absent
  auto no_lambda = data;
  no_lambda.lambda_nm.clear();
  CHECK(fit_depth(no_lambda, s, inst, 5000.0, 6000.0, 3, 16).points_used == data.xi_nm.size());
}

TEST_CASE("fit report") {
  GratingSpec s;
  InstrumentConfig inst;
  const auto data = synthetic(s, inst, 16, 0.0, 1);
  const auto r = fit_depth(data, s, inst, 5000.0, 6000.0, 3, 16);
  const auto j = nlohmann::json::parse(fit_report_json(r));
  for (const char* k : {"d_best_nm", "sse", "grid", "spec", "instrument"}) CHECK(j.contains(k));
  CHECK(j["grid"].size() == 3);
  CHECK(j["grid"][0].contains("d_nm"));
  CHECK(j["spec"]["depth_nm"] == r.d_best_nm);
}

}  // TEST_SUITE
