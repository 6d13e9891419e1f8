#include "dnls/profile_core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "dnls/errors.hpp"

namespace dnls {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Domain: return "domain";
    case ErrorKind::Span: return "span";
    case ErrorKind::Overflow: return "overflow";
    case ErrorKind::NonContraction: return "non_contraction";
    case ErrorKind::SampleLimit: return "sample_limit";
    case ErrorKind::IllConditioned: return "ill_conditioned";
    case ErrorKind::Degenerate: return "degenerate";
    case ErrorKind::Config: return "config";
  }
  return "unknown";
}

const char* to_string(OdeSide side) {
  return side == OdeSide::PositiveY ? "positive" : "negative";
}

void InitialData::validate() const {
  if (!std::isfinite(a0) || !std::isfinite(a1)) {
    throw Error(ErrorKind::Domain, "initial data must be finite");
  }
}

double amplitude_rhs(double y, double a, double /*da*/) {
  const double a2 = a * a;
  return a * (-(y * y) / 16.0 + (y / 4.0) * a2 - (3.0 / 16.0) * a2 * a2);
}

double reflected_rhs(double y, double a, double /*da*/) {
  const double a2 = a * a;
  return -a * ((y * y) / 16.0 + (y / 4.0) * a2 + (3.0 / 16.0) * a2 * a2);
}

double b_rhs(double eta, double b, double /*db*/, CubicSign sign) {
  if (!(eta > 0.0)) {
    throw Error(ErrorKind::Domain, "b_rhs requires eta > 0, got " + std::to_string(eta));
  }
  const double b2 = b * b;
  const double cubic = (sign == CubicSign::PlusCubic ? 1.0 : -1.0) * b * b2 / (2.0 * eta);
  const double inv_eta2 = 1.0 / (eta * eta);
  return -b + cubic - (3.0 / 16.0) * b * inv_eta2 - (3.0 / 64.0) * b * b2 * b2 * inv_eta2;
}

std::complex<double> complex_profile_rhs(double y, std::complex<double> q,
                                         std::complex<double> dq) {
  constexpr std::complex<double> i{0.0, 1.0};
  const double mod2 = std::norm(q);
  return (i / 4.0) * q + (i / 2.0) * y * dq - i * (2.0 * mod2 * dq + q * q * std::conj(dq));
}

// ---------------------------------------------------------------------------
// Series

SeriesApprox::SeriesApprox(std::vector<double> coeffs, double radius)
    : coeffs_(std::move(coeffs)), radius_(radius) {}

double SeriesApprox::operator()(double y) const {
  double acc = 0.0;
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * y + *it;
  return acc;
}

double SeriesApprox::derivative(double y) const {
  double acc = 0.0;
  for (std::size_t n = coeffs_.size(); n-- > 1;) acc = acc * y + static_cast<double>(n) * coeffs_[n];
  return acc;
}

namespace {

// Cauchy–Hadamard estimate from the upper half of the coefficients, halved.
double estimate_radius(const std::vector<double>& c) {
  double r = std::numeric_limits<double>::infinity();
  for (std::size_t n = std::max<std::size_t>(2, c.size() / 2); n < c.size(); ++n) {
    if (c[n] != 0.0) r = std::min(r, std::pow(std::abs(c[n]), -1.0 / static_cast<double>(n)));
  }
  return 0.5 * r;
}

// Coefficient n of the product of two series, using terms 0..n.
double cauchy(const std::vector<double>& a, const std::vector<double>& b, std::size_t n) {
  double s = 0.0;
  for (std::size_t k = 0; k <= n; ++k) s += a[k] * b[n - k];
  return s;
}

std::vector<double> truncated_product(const std::vector<double>& a, const std::vector<double>& b,
                                      std::size_t degree) {
  std::vector<double> out(degree + 1, 0.0);
  for (std::size_t i = 0; i < a.size() && i <= degree; ++i) {
    if (a[i] == 0.0) continue;
    for (std::size_t j = 0; j < b.size() && i + j <= degree; ++j) out[i + j] += a[i] * b[j];
  }
  return out;
}

// n-th coefficient of  -(y^2/16) A + (y/4) A^3 - (3/16) A^5.
double rhs_coefficient(const std::vector<double>& a, const std::vector<double>& cube,
                       const std::vector<double>& fifth, std::size_t n) {
  double r = -(3.0 / 16.0) * fifth[n];
  if (n >= 1) r += 0.25 * cube[n - 1];
  if (n >= 2) r -= a[n - 2] / 16.0;
  return r;
}

}  // namespace

SeriesApprox taylor_series(const InitialData& init, int order) {
  init.validate();
  if (order < 2) throw Error(ErrorKind::Domain, "taylor_series requires order >= 2");
  const auto size = static_cast<std::size_t>(order) + 1;
  std::vector<double> a(size, 0.0), sq(size, 0.0), cube(size, 0.0), fifth(size, 0.0);
  a[0] = init.a0;
  a[1] = init.a1;
  for (std::size_t n = 0; n + 2 < size; ++n) {
    // a[0..n] are final here, so the products through degree n are too.
    sq[n] = cauchy(a, a, n);
    cube[n] = cauchy(sq, a, n);
    fifth[n] = cauchy(cube, sq, n);
    const double next = rhs_coefficient(a, cube, fifth, n) / static_cast<double>((n + 2) * (n + 1));
    if (!std::isfinite(next)) {
      throw Error(ErrorKind::Overflow, "Taylor coefficient " + std::to_string(n + 2) + " overflowed");
    }
    a[n + 2] = next;
  }
  const double radius = estimate_radius(a);
  return SeriesApprox(std::move(a), radius);
}

double recurrence_residual(const SeriesApprox& series) {
  const auto& a = series.coeffs();
  const std::size_t deg = a.size() - 1;
  const auto sq = truncated_product(a, a, deg);
  const auto cube = truncated_product(sq, a, deg);
  const auto fifth = truncated_product(cube, sq, deg);
  double worst = 0.0;
  for (std::size_t n = 0; n + 2 <= deg; ++n) {
    const double lhs = static_cast<double>((n + 2) * (n + 1)) * a[n + 2];
    worst = std::max(worst, std::abs(lhs - rhs_coefficient(a, cube, fifth, n)));
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Picard iteration on truncated polynomials

namespace {

std::vector<double> picard_map(const InitialData& init, const std::vector<double>& a,
                               std::size_t degree) {
  const auto sq = truncated_product(a, a, degree);
  const auto cube = truncated_product(sq, a, degree);
  const auto fifth = truncated_product(cube, sq, degree);
  // N(s) = (s^2/16) A - (s/4) A^3 + (3/16) A^5
  std::vector<double> nl(degree + 1, 0.0);
  for (std::size_t k = 0; k <= degree; ++k) {
    double v = (3.0 / 16.0) * fifth[k];
    if (k >= 1) v -= 0.25 * cube[k - 1];
    if (k >= 2) v += a[k - 2] / 16.0;
    nl[k] = v;
  }
  std::vector<double> out(degree + 1, 0.0);
  out[0] = init.a0;
  if (degree >= 1) out[1] = init.a1;
  // ∫_0^y (y - s) s^k ds = y^{k+2} / ((k+1)(k+2))
  for (std::size_t k = 0; k + 2 <= degree; ++k) {
    out[k + 2] -= nl[k] / static_cast<double>((k + 1) * (k + 2));
  }
  return out;
}

double sup_distance(const std::vector<double>& p, const std::vector<double>& q, double delta,
                    double* sup_p = nullptr) {
  constexpr int kGrid = 400;
  const SeriesApprox sp(p, 0.0), sq(q, 0.0);
  double worst = 0.0, top = 0.0;
  for (int i = 0; i <= kGrid; ++i) {
    const double y = -delta + 2.0 * delta * i / kGrid;
    const double vp = sp(y);
    worst = std::max(worst, std::abs(vp - sq(y)));
    top = std::max(top, std::abs(vp));
  }
  if (sup_p) *sup_p = top;
  return worst;
}

}  // namespace

PicardResult picard_iterate(const InitialData& init, double delta, int iterations,
                            int truncation_degree) {
  init.validate();
  if (!(delta > 0.0) || !std::isfinite(delta)) {
    throw Error(ErrorKind::Domain, "picard_iterate requires a finite delta > 0");
  }
  if (iterations < 1) throw Error(ErrorKind::Domain, "picard_iterate requires iterations >= 1");
  if (truncation_degree < 2) throw Error(ErrorKind::Domain, "truncation degree must be >= 2");

  const auto degree = static_cast<std::size_t>(truncation_degree);
  std::vector<double> current(degree + 1, 0.0);
  current[0] = init.a0;
  current[1] = init.a1;

  PicardResult result;
  result.delta = delta;
  double scale = 0.0;
  for (int k = 0; k < iterations; ++k) {
    auto next = picard_map(init, current, degree);
    for (double c : next) {
      if (!std::isfinite(c)) throw Error(ErrorKind::Overflow, "Picard iterate overflowed");
    }
    result.distances.push_back(sup_distance(next, current, delta, &scale));
    current = std::move(next);
  }

  const auto& d = result.distances;
  const double floor = 64.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, scale);
  if (d.size() >= 2 && d.back() > d[d.size() - 2] && d.back() > floor) {
    throw Error(ErrorKind::NonContraction,
                "Picard distances grew: " + std::to_string(d[d.size() - 2]) + " -> " +
                    std::to_string(d.back()));
  }
  result.approx = SeriesApprox(std::move(current), delta);
  return result;
}

}  // namespace dnls
