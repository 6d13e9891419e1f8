#pragma once

// Solutions of the linearized amplitude equation g'' + (y^2/16) g = 0 in terms
// of Bessel functions of order ±1/4, plus the special functions they need.

namespace dnls {

/// Gamma function by the Lanczos approximation (g = 7, 9 terms) with the
/// reflection formula for x < 1/2. Throws Error(Domain) at poles.
double gamma_lanczos(double x);

/// z above which bessel_j switches from the ascending series to the Hankel
/// asymptotic expansion.
inline constexpr double kBesselSwitch = 30.0;

/// J_nu(z) for real nu and z >= 0: ascending series with `terms` terms for
/// z <= kBesselSwitch, Hankel expansion above. Throws Error(Domain) for z < 0
/// or for z = 0 with negative non-integer nu.
double bessel_j(double nu, double z, int terms = 60);

/// Ascending series, summed in extended precision to survive cancellation.
double bessel_j_series(double nu, double z, int terms = 60);

/// Hankel asymptotic expansion truncated at its smallest term. z > 0.
double bessel_j_hankel(double nu, double z);

/// Leading large-argument term sqrt(2/(pi z)) cos(z - pi nu/2 - pi/4).
double bessel_j_leading(double nu, double z);

/// Value with first and second derivatives.
struct Jet {
  double value = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
};

enum class Parity { Even, Odd };

/// G_even(y) = (1/2) Γ(3/4) |y|^{1/2} J_{-1/4}(y^2/8), G_even(0) = 1, G_even'(0) = 0.
Jet g_even_jet(double y);
/// G_odd(y) = 2 Γ(5/4) y |y|^{-1/2} J_{1/4}(y^2/8), G_odd(0) = 0, G_odd'(0) = 1.
Jet g_odd_jet(double y);

inline double g_even(double y) { return g_even_jet(y).value; }
inline double g_odd(double y) { return g_odd_jet(y).value; }

/// Solution of the linear problem with g(0) = g0, g'(0) = g1.
double linear_solution(double g0, double g1, double y);

/// Right-hand side of the linear problem, g'' = -(y^2/16) g.
double linear_rhs(double y, double g, double dg);

/// Leading term of G_even / G_odd for |y| >> 1. Throws Error(Domain) for |y| < 5.
double asymptotic_g(double y, Parity which);

/// G_even G_odd' - G_even' G_odd (identically 1).
double wronskian(double y);

/// g'' + (y^2/16) g evaluated on a jet.
inline double linear_residual(const Jet& g, double y) { return g.d2 + (y * y / 16.0) * g.value; }

}  // namespace dnls
