#pragma once

// Right-hand sides of the self-similar profile equations and local
// (near y = 0) solvers for the amplitude equation
//
//   A'' + (y^2/16) A = (y/4) A^3 - (3/16) A^5.

#include <complex>
#include <vector>

namespace dnls {

/// Amplitude value and slope at y = 0.
struct InitialData {
  double a0 = 0.0;
  double a1 = 0.0;

  /// Throws Error(Domain) unless both fields are finite.
  void validate() const;

  /// Data for the reflected amplitude Ã(y) = A(-y): (a0, -a1).
  InitialData reflected() const { return {a0, -a1}; }
};

/// Which half-line of the amplitude equation is being considered.
enum class OdeSide { PositiveY, NegativeY };

/// Sign of the cubic term of the unit-frequency B-equation. PlusCubic is the
/// y > 0 form, MinusCubic the reflected (y < 0) form.
enum class CubicSign { PlusCubic, MinusCubic };

constexpr CubicSign cubic_sign_for(OdeSide side) {
  return side == OdeSide::PositiveY ? CubicSign::PlusCubic : CubicSign::MinusCubic;
}

const char* to_string(OdeSide side);

/// A'' = -(y^2/16) a + (y/4) a^3 - (3/16) a^5. `da` is unused.
double amplitude_rhs(double y, double a, double da);

/// Ã'' = -((y^2/16) a + (y/4) a^3 + (3/16) a^5); equals amplitude_rhs(-y, a, .).
double reflected_rhs(double y, double a, double da);

/// B'' = -b ± b^3/(2 eta) - 3 b/(16 eta^2) - 3 b^5/(64 eta^2).
/// Throws Error(Domain) for eta <= 0.
double b_rhs(double eta, double b, double db, CubicSign sign);

/// Complex profile equation solved for Q'':
/// Q'' = (i/4) q + (i/2) y dq - i (2 |q|^2 dq + q^2 conj(dq)).
std::complex<double> complex_profile_rhs(double y, std::complex<double> q,
                                         std::complex<double> dq);

/// Truncated power series about y = 0.
class SeriesApprox {
 public:
  SeriesApprox() = default;
  SeriesApprox(std::vector<double> coeffs, double radius);

  double operator()(double y) const;
  double derivative(double y) const;

  const std::vector<double>& coeffs() const { return coeffs_; }
  /// Estimated radius inside which the truncated series is trustworthy.
  double radius() const { return radius_; }
  int order() const { return static_cast<int>(coeffs_.size()) - 1; }

 private:
  std::vector<double> coeffs_;
  double radius_ = 0.0;
};

/// Taylor coefficients of the amplitude equation through y^order, built by
/// Cauchy products of the series with itself (A^2, A^3, A^5).
/// Throws Error(Domain) for order < 2, Error(Overflow) if a coefficient is
/// not finite.
SeriesApprox taylor_series(const InitialData& init, int order = 20);

/// Max over n of |(n+2)(n+1) c[n+2] - rhs_n| where rhs_n is recomputed from
/// full (non-incremental) Cauchy products. Zero up to rounding for a series
/// produced by taylor_series.
double recurrence_residual(const SeriesApprox& series);

struct PicardResult {
  SeriesApprox approx;
  /// sup over (-delta, delta) of |A_{k+1} - A_k| for each iteration k.
  std::vector<double> distances;
  double delta = 0.0;
};

/// Iterates the integral form
///   A(y) = A0 + A1 y - ∫_0^y (y - s) ((s^2/16) A - (s/4) A^3 + (3/16) A^5) ds
/// starting from the affine seed, on polynomials truncated at
/// `truncation_degree`. Throws Error(NonContraction) if the last distance grew
/// relative to the previous one (above the rounding floor).
PicardResult picard_iterate(const InitialData& init, double delta = 0.25,
                            int iterations = 8, int truncation_degree = 48);

}  // namespace dnls
