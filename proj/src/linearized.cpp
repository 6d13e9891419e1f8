#include "dnls/linearized.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "dnls/errors.hpp"

namespace dnls {

namespace {

// Ascending series lose about log10(e^z / (2 pi z)) digits to cancellation,
// ~11 digits at z = 30, so they are accumulated in a wider type.
#if defined(__SIZEOF_FLOAT128__)
using Wide = __float128;
#else
using Wide = long double;
#endif

Wide wide_abs(Wide x) { return x < 0 ? -x : x; }

constexpr double kPi = std::numbers::pi;

bool is_nonpositive_integer(double x) { return x <= 0.0 && x == std::floor(x); }

}  // namespace

double gamma_lanczos(double x) {
  static constexpr std::array<double, 9> p{
      0.99999999999980993,     676.5203681218851,     -1259.1392167224028,
      771.32342877765313,      -176.61502916214059,   12.507343278686905,
      -0.13857109526572012,    9.9843695780195716e-6, 1.5056327351493116e-7};
  if (!std::isfinite(x) || is_nonpositive_integer(x)) {
    throw Error(ErrorKind::Domain, "gamma pole or non-finite argument: " + std::to_string(x));
  }
  if (x < 0.5) return kPi / (std::sin(kPi * x) * gamma_lanczos(1.0 - x));
  const double z = x - 1.0;
  double a = p[0];
  const double t = z + 7.5;
  for (std::size_t i = 1; i < p.size(); ++i) a += p[i] / (z + static_cast<double>(i));
  return std::sqrt(2.0 * kPi) * std::pow(t, z + 0.5) * std::exp(-t) * a;
}

double bessel_j_series(double nu, double z, int terms) {
  if (!(z >= 0.0)) throw Error(ErrorKind::Domain, "bessel_j requires z >= 0");
  if (terms < 1) throw Error(ErrorKind::Domain, "bessel_j requires terms >= 1");
  if (nu < 0.0 && nu == std::floor(nu)) {
    // J_{-n} = (-1)^n J_n
    const double j = bessel_j_series(-nu, z, terms);
    return (static_cast<long long>(-nu) % 2 == 0) ? j : -j;
  }
  if (z == 0.0) {
    if (nu == 0.0) return 1.0;
    if (nu > 0.0) return 0.0;
    throw Error(ErrorKind::Domain, "J_nu(0) is unbounded for negative non-integer nu");
  }
  const Wide w = static_cast<Wide>(z) * static_cast<Wide>(z) / 4;
  Wide term = 1, sum = 1;
  for (int k = 1; k < terms; ++k) {
    term *= -w / (static_cast<Wide>(k) * (static_cast<Wide>(k) + static_cast<Wide>(nu)));
    sum += term;
  }
  return std::pow(0.5 * z, nu) / gamma_lanczos(nu + 1.0) * static_cast<double>(sum);
}

double bessel_j_hankel(double nu, double z) {
  if (!(z > 0.0)) throw Error(ErrorKind::Domain, "Hankel expansion requires z > 0");
  const double mu = 4.0 * nu * nu;
  double p = 1.0, q = 0.0;
  double term = 1.0;
  for (int k = 1; k < 200; ++k) {
    const double odd = 2.0 * k - 1.0;
    const double next = term * (mu - odd * odd) / (8.0 * k * z);
    if (std::abs(next) >= std::abs(term) && k > 1) break;  // asymptotic series turned
    term = next;
    // a_k / z^k enters P with sign (-1)^{k/2} (k even), Q with (-1)^{(k-1)/2} (k odd).
    const int m = k / 2;
    const double sign = (m % 2 == 0) ? 1.0 : -1.0;
    if (k % 2 == 0) p += sign * term; else q += sign * term;
    if (term == 0.0 || std::abs(term) < 1e-18) break;
  }
  // cos/sin of (z - phase) via addition formulas keeps the large z exact.
  const double phase = (0.5 * nu + 0.25) * kPi;
  const double cz = std::cos(z), sz = std::sin(z);
  const double cp = std::cos(phase), sp = std::sin(phase);
  const double cos_chi = cz * cp + sz * sp;
  const double sin_chi = sz * cp - cz * sp;
  return std::sqrt(2.0 / (kPi * z)) * (p * cos_chi - q * sin_chi);
}

double bessel_j_leading(double nu, double z) {
  if (!(z > 0.0)) throw Error(ErrorKind::Domain, "leading Bessel term requires z > 0");
  return std::sqrt(2.0 / (kPi * z)) * std::cos(z - 0.5 * kPi * nu - 0.25 * kPi);
}

double bessel_j(double nu, double z, int terms) {
  if (!(z >= 0.0)) throw Error(ErrorKind::Domain, "bessel_j requires z >= 0");
  return z <= kBesselSwitch ? bessel_j_series(nu, z, terms) : bessel_j_hankel(nu, z);
}

namespace {

// |y| at which z = y^2/8 reaches the series/asymptotic switch.
const double kYSwitch = std::sqrt(8.0 * kBesselSwitch);

// Power series in y: sum_k c_k y^{4k + shift} (shift 0 or 1), with c_0 = 1 and
// c_k / c_{k-1} = -1 / (256 k (k + offset)). Terms with k >= 1 are
// differentiated through y^{4(k-1)} so no negative powers appear at y = 0.
Jet power_series_jet(double y, int shift, double offset) {
  const Wide yw = y, y2 = yw * yw, y3 = y2 * yw, y4 = y2 * y2;
  Wide v = shift == 0 ? Wide(1) : yw;
  Wide d1 = shift == 0 ? Wide(0) : Wide(1);
  Wide d2 = 0;
  Wide coeff = 1;
  Wide prev = 1;  // y^{4(k-1)}
  for (int k = 1; k < 400; ++k) {
    coeff *= Wide(-1) / (Wide(256) * Wide(k) * (Wide(k) + Wide(offset)));
    const Wide n = Wide(4 * k + shift);
    const Wide base = coeff * prev;
    Wide t;
    if (shift == 0) {
      t = base * y4;
      d1 += base * n * y3;
      d2 += base * n * (n - 1) * y2;
    } else {
      t = base * y4 * yw;
      d1 += base * n * y4;
      d2 += base * n * (n - 1) * y3;
    }
    v += t;
    prev *= y4;
    if (k > 4 && wide_abs(t) * (Wide(1) + n * n) < Wide(1e-32)) break;
  }
  return {static_cast<double>(v), static_cast<double>(d1), static_cast<double>(d2)};
}

// c y^{1/2} J_nu(y^2/8) and its derivatives for y > 0.
Jet bessel_form_jet(double y, double c, double nu) {
  const double z = y * y / 8.0;
  const double j0 = bessel_j(nu, z);
  const double jm1 = bessel_j(nu - 1.0, z), jp1 = bessel_j(nu + 1.0, z);
  const double jm2 = bessel_j(nu - 2.0, z), jp2 = bessel_j(nu + 2.0, z);
  const double dj = 0.5 * (jm1 - jp1);
  const double ddj = 0.25 * (jm2 - 2.0 * j0 + jp2);
  const double sy = std::sqrt(y);
  Jet g;
  g.value = c * sy * j0;
  g.d1 = c * (0.5 * j0 / sy + 0.25 * y * sy * dj);
  g.d2 = c * (-0.25 * j0 / (y * sy) + 0.5 * sy * dj + (y * y * sy / 16.0) * ddj);
  return g;
}

}  // namespace

Jet g_even_jet(double y) {
  const double ay = std::abs(y);
  Jet g = ay <= kYSwitch ? power_series_jet(ay, 0, -0.25)
                         : bessel_form_jet(ay, 0.5 * gamma_lanczos(0.75), -0.25);
  if (y < 0.0) g.d1 = -g.d1;
  return g;
}

Jet g_odd_jet(double y) {
  const double ay = std::abs(y);
  Jet g = ay <= kYSwitch ? power_series_jet(ay, 1, 0.25)
                         : bessel_form_jet(ay, 2.0 * gamma_lanczos(1.25), 0.25);
  if (y < 0.0) {
    g.value = -g.value;
    g.d2 = -g.d2;
  }
  return g;
}

double linear_solution(double g0, double g1, double y) {
  return g0 * g_even(y) + g1 * g_odd(y);
}

double linear_rhs(double y, double g, double /*dg*/) { return -(y * y / 16.0) * g; }

double asymptotic_g(double y, Parity which) {
  const double ay = std::abs(y);
  if (ay < 5.0) throw Error(ErrorKind::Domain, "asymptotic_g requires |y| >= 5");
  const double z = y * y / 8.0;
  if (which == Parity::Even) {
    return 2.0 * gamma_lanczos(0.75) / std::sqrt(kPi) / std::sqrt(ay) * std::cos(z - kPi / 8.0);
  }
  return 8.0 * gamma_lanczos(1.25) / std::sqrt(kPi) * y / (ay * std::sqrt(ay)) *
         std::cos(z - 3.0 * kPi / 8.0);
}

double wronskian(double y) {
  const Jet e = g_even_jet(y), o = g_odd_jet(y);
  return e.value * o.d1 - e.d1 * o.value;
}

}  // namespace dnls
