#pragma once

#include <array>

namespace dnls::detail {

// 5-point Gauss–Legendre on [-1, 1].
inline constexpr std::array<double, 5> kGaussX{
    -0.9061798459386640, -0.5384693101056831, 0.0, 0.5384693101056831, 0.9061798459386640};
inline constexpr std::array<double, 5> kGaussW{
    0.2369268850561891, 0.4786286704993665, 0.5688888888888889, 0.4786286704993665,
    0.2369268850561891};

// ∫_a^b f with `pieces` equal Gauss–Legendre panels.
template <class F>
double gauss_legendre(F&& f, double a, double b, int pieces = 1) {
  const double h = (b - a) / pieces;
  double total = 0.0;
  for (int p = 0; p < pieces; ++p) {
    const double mid = a + (p + 0.5) * h, half = 0.5 * h;
    double s = 0.0;
    for (std::size_t k = 0; k < kGaussX.size(); ++k) s += kGaussW[k] * f(mid + half * kGaussX[k]);
    total += half * s;
  }
  return total;
}

}  // namespace dnls::detail
