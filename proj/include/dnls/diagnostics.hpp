#pragma once

// Modified energies, their monotonicity along trajectories, extrema of
// oscillating solutions and the inequalities between them, decay sups.

#include <functional>
#include <optional>
#include <vector>

#include "dnls/b_path.hpp"
#include "dnls/integrator.hpp"
#include "dnls/profile_core.hpp"

namespace dnls {

// E1/E2 belong to the reflected equation, E3/E4 to the y > 0 equation.
double energy_e1(double y, double a, double da);
double energy_e3(double y, double a, double da);
/// Throw Error(Domain) for y <= 0.
double energy_e2(double y, double a, double da);
double energy_e4(double y, double a, double da);

struct EnergySample {
  double y = 0.0;
  double e1 = 0.0;
  double e3 = 0.0;
  std::optional<double> e2;  // y > 0 only
  std::optional<double> e4;
};

EnergySample energy_sample(double y, double a, double da);

// ---------------------------------------------------------------------------
// E_B

struct EbValue {
  double value = 0.0;
  /// Bound on the dropped tail ∫_{eta_max}^∞.
  double remainder = 0.0;
  double f_b = 0.0;
};

/// Conserved energy of the B-equation,
///   E_B = B'^2/2 + B^2/2 + s B^4/(8η) - ∫_η^∞ (s B^4/8 + 3BB'/16 + 3B^5B'/64) dζ/ζ^2
/// with s = -1 for PlusCubic and +1 for MinusCubic. The integral is taken over
/// the path up to eta_max plus a bound for the rest.
/// Throws Error(Span) if eta or eta_max lie outside the path or eta > eta_max.
EbValue energy_eb(double eta, const BPath& path, double eta_max);

/// E_B at every node of `path` with η <= eta_max (one pass).
std::vector<EbValue> energy_eb_profile(const BPath& path, double eta_max);

struct EbReport {
  double mean = 0.0;
  /// max - min of E_B over the nodes.
  double spread = 0.0;
  double remainder = 0.0;
  /// sup η |F_B(η)|.
  double fb_constant = 0.0;
};

EbReport eb_report(const BPath& path, double eta_lo, double eta_hi);

// ---------------------------------------------------------------------------
// Monotonicity

struct InequalityCheck {
  const char* name = "";
  std::size_t evaluated = 0;
  /// max over nodes of (lhs - rhs) / scale; <= 0 when the inequality holds.
  double max_relative_violation = -1.0;
  double worst_y = 0.0;
  /// max |chain-rule value - closed form| / scale.
  double closed_form_mismatch = 0.0;
  bool holds(double tol) const { return evaluated == 0 || max_relative_violation <= tol; }
};

struct MonotonicityReport {
  OdeSide side = OdeSide::PositiveY;
  double y_from = 0.0;
  /// Reflected: d/dy(E1/y^2) <= 0, E2' <= 0.
  /// Positive:  d/dy(E3/y^2) <= A^4/(16y^2), E4' <= A^4/(8y).
  InequalityCheck first, second;
};

/// Domain start: first zero n1 of Ã (reflected) or 1/3 (positive).
/// `traj` solves the reflected equation on y >= 0 (NegativeY) or the amplitude
/// equation on y >= 0 (PositiveY). Returns an empty report if the reflected
/// solution has no zero.
MonotonicityReport monotonicity_report(const Trajectory& traj, OdeSide side);

struct BoundCheck {
  double n1 = 0.0;
  double bound_statement = 0.0;
  double bound_proof = 0.0;
  /// max over y > n1 of lhs - bound.
  double margin_statement = 0.0;
  double margin_proof = 0.0;
  bool statement_holds = false;
  bool proof_holds = false;
  /// Only the variant with 1/(16 n1) inside the root held.
  bool flagged = false;
};

/// (1/2y) Ã'^2 + (y/32) Ã^2 against the bound in terms of (A0, n1), for a
/// reflected trajectory with Ã'(0) = 0.
std::optional<BoundCheck> reflected_energy_bound(const Trajectory& traj, double a0);

// ---------------------------------------------------------------------------
// Extrema and oscillation inequalities

struct ExtremaSequence {
  /// Maxima of f^2 (zeros of f', m0 = start when f'(start) = 0).
  std::vector<double> m;
  /// Maxima of f'^2 (zeros of f).
  std::vector<double> n;
};

/// First root of component `component` (0: f, 1: f') past the start, in the
/// direction of travel, polished by bisection to 1e-12. None for the zero
/// solution.
std::optional<double> first_zero(const Trajectory& traj, int component);

/// Scalar trajectory, either direction; roots are listed in the order of
/// travel. Bracketed between nodes and bisected on the dense output to 1e-12.
ExtremaSequence extrema(const Trajectory& traj);

using Potential = std::function<double(double)>;

struct PotentialSpec {
  std::vector<Potential> v;  // V_k, k = 0..K

  double weighted(double x, double f) const;  // Σ V_k(x) f^{2k+2}/(k+1)
  /// V0 = x^2/16, V1 = x/4, V2 = 3/16.
  static PotentialSpec reflected_amplitude();
};

struct ChainMargins {
  std::size_t j = 0;
  double lower = 0.0;  // relative margins, >= 0 when the inequality holds
  double upper = 0.0;
};

struct OscillationReport {
  bool interlaced = true;
  std::vector<ChainMargins> first_chain;   // V_k at n_j
  std::vector<ChainMargins> second_chain;  // V_k at m_j / m_{j-1}
  double min_margin = 0.0;
  /// |f(m_j)| non-increasing and f'(n_j)^2 non-decreasing (up to 1e-12 relative).
  bool maxima_monotone = true;
};

/// Checks, for every j >= 1 with both m_{j-1}, m_j, n_j detected,
///   Σ V_k(n_j)/(k+1) f(m_j)^{2k+2} <= f'(n_j)^2 <= Σ V_k(n_j)/(k+1) f(m_{j-1})^{2k+2}
///   Σ V_k(m_j)/(k+1) f(m_j)^{2k+2} >= f'(n_j)^2 >= Σ V_k(m_{j-1})/(k+1) f(m_{j-1})^{2k+2}
/// for f'' = -Σ V_k f^{2k} f. Margins are relative to f'(n_j)^2.
OscillationReport oscillation_inequalities(const ExtremaSequence& seq, const Trajectory& traj,
                                           const PotentialSpec& pot);

// ---------------------------------------------------------------------------
// Decay

struct DecayReport {
  double sup_weighted_a = 0.0;   // sup <y>^{1/2} |A|
  double sup_weighted_da = 0.0;  // sup <y>^{-1/2} |A'|
  double a0 = 0.0;
  /// Sups divided by |A(0)|; zero when A(0) = 0.
  double c3_a = 0.0;
  double c3_da = 0.0;
};

DecayReport decay_report(const Trajectory& traj);
/// Combines the two sides of a profile.
DecayReport decay_report(const Trajectory& pos, const Trajectory& neg);

struct EnvelopeFit {
  double slope = 0.0;
  std::size_t points = 0;
};

/// Least-squares slope of log|A(m_j)| against log|m_j| over maxima with
/// |m_j| in [lo, hi]. Throws Error(IllConditioned) with fewer than 3 maxima.
EnvelopeFit envelope_slope(const Trajectory& traj, double lo, double hi);

/// sup over the maxima m_j with |m_j| in [lo, hi] of |m_j|^{1/2} |A(m_j)|.
double weighted_envelope(const Trajectory& traj, double lo, double hi);

}  // namespace dnls
