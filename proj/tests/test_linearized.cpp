#include <doctest.h>

#include <cmath>
#include <numbers>

#include "dnls/errors.hpp"
#include "dnls/integrator.hpp"
#include "dnls/linearized.hpp"

using namespace dnls;

// Reference values computed with mpmath at 30 digits.
namespace ref {
constexpr double j_quarter_1 = 0.752231333340790056977;
constexpr double j_mquarter_1 = 0.669384817261574451523;
constexpr double j_quarter_27_5 = 0.0571438820870373024053;
constexpr double j_m5quarter_33 = -0.130051846469118267146;
constexpr double gamma_3_4 = 1.22541670246517764513;
constexpr double gamma_5_4 = 0.906402477055477077983;
constexpr double gamma_1_4 = 3.62560990822190831193;
constexpr double g_even_3 = 0.614831010945846545466;
constexpr double g_even_10 = 0.390412139427578874215;
constexpr double g_even_17_5 = 0.324764538822472260884;
constexpr double g_odd_3 = 2.29231769537332917865;
constexpr double g_odd_10 = 0.405427568155202596632;
constexpr double g_odd_17_5 = 0.807990504221391684842;
}  // namespace ref

TEST_CASE("gamma") {
  CHECK(gamma_lanczos(0.75) == doctest::Approx(ref::gamma_3_4).epsilon(1e-13));
  CHECK(gamma_lanczos(1.25) == doctest::Approx(ref::gamma_5_4).epsilon(1e-13));
  CHECK(gamma_lanczos(0.25) == doctest::Approx(ref::gamma_1_4).epsilon(1e-13));
  CHECK(gamma_lanczos(1.25) == doctest::Approx(gamma_lanczos(0.25) / 4.0).epsilon(1e-13));
  for (double x = 0.05; x < 1.0; x += 0.1) {
    const double lhs = gamma_lanczos(x) * gamma_lanczos(1.0 - x);
    CHECK(lhs == doctest::Approx(std::numbers::pi / std::sin(std::numbers::pi * x)).epsilon(1e-12));
  }
  for (double x = -3.7; x < 12.0; x += 0.53) {
    CHECK(gamma_lanczos(x) == doctest::Approx(std::tgamma(x)).epsilon(1e-12));
  }
  CHECK_THROWS_AS(gamma_lanczos(0.0), Error);
  CHECK_THROWS_AS(gamma_lanczos(-2.0), Error);
}

TEST_CASE("bessel J reference values") {
  CHECK(bessel_j(0.25, 0.0) == 0.0);
  CHECK(bessel_j(1.75, 0.0) == 0.0);
  CHECK(bessel_j(0.25, 1.0) == doctest::Approx(ref::j_quarter_1).epsilon(1e-12));
  CHECK(bessel_j(-0.25, 1.0) == doctest::Approx(ref::j_mquarter_1).epsilon(1e-12));
  CHECK(bessel_j(0.25, 27.5) == doctest::Approx(ref::j_quarter_27_5).epsilon(1e-11));
  CHECK(bessel_j(-1.25, 33.0) == doctest::Approx(ref::j_m5quarter_33).epsilon(1e-11));
  CHECK_THROWS_AS(bessel_j(0.25, -1.0), Error);
  CHECK_THROWS_AS(bessel_j(-0.25, 0.0), Error);
}

TEST_CASE("bessel J against the standard library") {
  for (double nu : {0.25, 0.75, 1.25, 2.25}) {
    for (double z = 0.1; z < 80.0; z += 0.713) {
      CHECK(std::abs(bessel_j(nu, z) - std::cyl_bessel_j(nu, z)) < 1e-12);
    }
  }
}

TEST_CASE("series and Hankel branches agree across the switch") {
  for (double nu : {-1.25, -0.25, 0.25, 0.75}) {
    for (double z = 25.0; z <= 35.0; z += 0.5) {
      CHECK(std::abs(bessel_j_series(nu, z) - bessel_j_hankel(nu, z)) < 1e-12);
    }
  }
}

TEST_CASE("large argument remainder is O(1/z) relative to the leading term") {
  for (double nu : {-0.25, 0.25}) {
    double c = 0.0;
    for (double z = 20.0; z <= 2000.0; z *= 1.07) {
      c = std::max(c, z * std::abs(bessel_j(nu, z) - bessel_j_leading(nu, z)) /
                          std::sqrt(2.0 / (std::numbers::pi * z)));
    }
    CHECK(std::isfinite(c));
    CHECK(c < 1.0);
  }
}

TEST_CASE("G values at the origin") {
  const Jet e = g_even_jet(0.0), o = g_odd_jet(0.0);
  CHECK(e.value == 1.0);
  CHECK(e.d1 == 0.0);
  CHECK(o.value == 0.0);
  CHECK(o.d1 == 1.0);
}

TEST_CASE("G reference values") {
  CHECK(g_even(3.0) == doctest::Approx(ref::g_even_3).epsilon(1e-12));
  CHECK(g_even(10.0) == doctest::Approx(ref::g_even_10).epsilon(1e-12));
  CHECK(g_even(17.5) == doctest::Approx(ref::g_even_17_5).epsilon(1e-12));
  CHECK(g_even(-17.5) == doctest::Approx(ref::g_even_17_5).epsilon(1e-12));
  CHECK(g_odd(3.0) == doctest::Approx(ref::g_odd_3).epsilon(1e-12));
  CHECK(g_odd(10.0) == doctest::Approx(ref::g_odd_10).epsilon(1e-12));
  CHECK(g_odd(17.5) == doctest::Approx(ref::g_odd_17_5).epsilon(1e-12));
  CHECK(g_odd(-17.5) == doctest::Approx(-ref::g_odd_17_5).epsilon(1e-12));
}

TEST_CASE("G solves the linear equation with unit Wronskian") {
  double res = 0.0, wr = 0.0;
  for (int k = -2000; k <= 2000; ++k) {
    const double y = k * 0.01;
    res = std::max({res, std::abs(linear_residual(g_even_jet(y), y)),
                    std::abs(linear_residual(g_odd_jet(y), y))});
    wr = std::max(wr, std::abs(wronskian(y) - 1.0));
  }
  CHECK(res < 1e-8);
  CHECK(wr < 1e-8);
}

TEST_CASE("G_even against integration") {
  const SolverConfig cfg;
  const auto t = integrate_scalar(linear_rhs, {1.0, 0.0}, 0.0, 5.0, cfg);
  CHECK(std::abs(t.sample(5.0)[0] - g_even(5.0)) < 1e-7);
  const auto o = integrate_scalar(linear_rhs, {0.0, 1.0}, 0.0, -5.0, cfg);
  CHECK(std::abs(o.sample(-5.0)[0] - g_odd(-5.0)) < 1e-7);
}

TEST_CASE("linear_solution") {
  CHECK(linear_solution(0.0, 0.0, 4.2) == 0.0);
  CHECK(linear_solution(1.0, 0.0, 4.2) == doctest::Approx(g_even(4.2)));
  CHECK(linear_solution(2.0, -1.0, 3.0) == doctest::Approx(2.0 * g_even(3.0) - g_odd(3.0)));
}

TEST_CASE("asymptotic form") {
  CHECK_THROWS_AS(asymptotic_g(4.0, Parity::Even), Error);
  for (double y : {6.0, 11.0, 37.0}) {
    CHECK(asymptotic_g(-y, Parity::Even) == asymptotic_g(y, Parity::Even));
    CHECK(asymptotic_g(-y, Parity::Odd) == -asymptotic_g(y, Parity::Odd));
  }
  for (Parity p : {Parity::Even, Parity::Odd}) {
    double c = 0.0;
    for (double y = 10.0; y <= 200.0; y += 0.01) {
      const double g = p == Parity::Even ? g_even(y) : g_odd(y);
      c = std::max(c, std::pow(y, 1.5) * std::abs(g - asymptotic_g(y, p)));
    }
    CHECK(std::isfinite(c));
    CHECK(c < 10.0);
  }
}

TEST_CASE("zeros of the asymptotic form track zeros of G_even") {
  const double h = 1e-3;
  std::vector<double> zg, za;
  for (double y = 10.0; y < 20.0; y += h) {
    if (g_even(y) * g_even(y + h) < 0.0) zg.push_back(y);
    if (asymptotic_g(y, Parity::Even) * asymptotic_g(y + h, Parity::Even) < 0.0) za.push_back(y);
  }
  REQUIRE(zg.size() == za.size());
  REQUIRE(zg.size() > 10);
  for (std::size_t k = 0; k < zg.size(); ++k) {
    INFO("zero near y = " << zg[k]);
    CHECK(std::abs(zg[k] - za[k]) <= 1.5 * h);
  }
}

TEST_CASE("zero offset of the asymptotic form follows the first Bessel correction") {
  // J_nu zeros sit (4nu^2 - 1)/(8z) off the leading cosine; in y this is 3/y^3
  const double h = 1e-4;
  int n = 0;
  for (double y = 10.0; y < 20.0; y += h) {
    if (g_even(y) * g_even(y + h) >= 0.0) continue;
    double za = y;
    for (double s = y - 0.01; s < y + 0.01; s += h) {
      if (asymptotic_g(s, Parity::Even) * asymptotic_g(s + h, Parity::Even) < 0.0) za = s;
    }
    CHECK(std::abs(y - za) <= 3.0 / (y * y * y) * 1.2 + 2.0 * h);
    ++n;
  }
  CHECK(n > 10);
}
