#pragma once

// Polar form of the B-variable, the logarithmic phase law, reconstruction of
// the complex profile Q = A e^{iφ} and residuals of the profile ODE and PDE.

#include <complex>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "dnls/b_path.hpp"
#include "dnls/integrator.hpp"
#include "dnls/profile_core.hpp"

namespace dnls {

// ---------------------------------------------------------------------------
// Polar form

struct PolarPath {
  CubicSign sign = CubicSign::PlusCubic;
  std::vector<double> etas;
  std::vector<double> r;
  /// Unwrapped; B = R cos ω, B' = R sin ω.
  std::vector<double> omega;
  /// ω' = (B B'' - B'^2) / R^2 from the path's B''.
  std::vector<double> domega;
  double min_r = 0.0;
};

/// Throws Error(Degenerate) if R < 1e-10 at any node. The first ω lies in
/// (-π, π]; later values are chosen by continuity.
PolarPath polar_decompose(const BPath& path);
PolarPath polar_decompose(std::span<const double> etas, std::span<const double> b,
                          std::span<const double> db, std::span<const double> ddb = {});

/// Rebuilt B = R cos ω and B' = R sin ω at node i.
inline double polar_b(const PolarPath& p, std::size_t i) { return p.r[i] * std::cos(p.omega[i]); }
inline double polar_db(const PolarPath& p, std::size_t i) { return p.r[i] * std::sin(p.omega[i]); }

/// Coefficient c of the leading correction ω' = -1 + c q^2 cos^4 ω / η.
/// +1/2 for PlusCubic, -1/2 for MinusCubic, 0 for the linear problem.
double phase_correction_coeff(CubicSign sign);

struct PhaseResidual {
  /// sup over [lo, hi] of η^{3/2} |ω' + 1 - c q^2 cos^4 ω / η|.
  double constant = 0.0;
  /// Same, restricted to the outer half (log scale) of the window.
  double constant_outer = 0.0;
};

/// `coeff` is c above; pass phase_correction_coeff(path sign) for the
/// equation itself.
PhaseResidual phase_ode_residual(const PolarPath& polar, double q_limit, double coeff,
                                 double eta_lo, double eta_hi);

struct AsymptoticFit {
  OdeSide side = OdeSide::PositiveY;
  double eta_lo = 0.0, eta_hi = 0.0;
  double q_limit = 0.0;
  double omega0 = 0.0;
  double log_coeff = 0.0;
  double inv_coeff = 0.0;  // coefficient of 1/η
  double residual_sup = 0.0;
  double residual_inner = 0.0;
  double residual_outer = 0.0;
};

/// q = sqrt(mean R^2) over the window (η-weighted), then a least-squares fit
///   ω + η ≈ c0 + c_log log η + c_inv / η
/// with log-measure weights. Throws Error(Domain) for eta_lo < 10,
/// Error(IllConditioned) when eta_hi < 10 eta_lo, Error(Span) if the window
/// is not covered and Error(Degenerate) when R vanishes.
AsymptoticFit fit_asymptotics(const PolarPath& polar, double eta_lo, double eta_hi,
                              OdeSide side);

/// ±(3/16) q^2: the log coefficient obtained by averaging cos^4 ω = 3/8 in the
/// phase equation.
double derived_log_coeff(OdeSide side, double q_limit);
/// ±(3/8) q^2, the value acceptance targets.
double expected_log_coeff(OdeSide side, double q_limit);

struct TailReport {
  /// η at which ω' >= -1/2 first failed (window upper end if never).
  double eta_valid = 0.0;
  bool assumption_held = true;
  double i_cos2 = 0.0;  // ∫_lo^hi cos 2ω / ζ
  double i_cos4 = 0.0;
  /// sup η |I(η) - I(hi)| for each integrand.
  double c_cos2 = 0.0;
  double c_cos4 = 0.0;
};

TailReport oscillatory_tail_decay(const BPath& path, double eta_lo, double eta_hi);

struct TailConvergence {
  double total = 0.0;     // ∫_lo^hi f
  double constant = 0.0;  // sup η |∫_η^hi f|
};

/// Cumulative Gauss–Legendre quadrature of f on [lo, hi] with panel width
/// `panel`; used for the tail checks and their classical comparisons.
TailConvergence tail_convergence(const std::function<double(double)>& f, double lo, double hi,
                                 double panel = 0.25);

// ---------------------------------------------------------------------------
// Phase and complex profile

struct PhaseProfile {
  std::vector<double> ys;
  std::vector<double> phi;
  double phi0 = 0.0;
  std::shared_ptr<const Trajectory> source;
  int subdivisions = 1;
};

/// φ(y) = φ0 + y^2/8 - (3/4) ∫_0^y A^2 at every node of `amp` (which starts at
/// y = 0), by Gauss–Legendre on each step split into `subdivisions` panels.
PhaseProfile phase_integral(std::shared_ptr<const Trajectory> amp, double phi0,
                            int subdivisions = 1);

/// φ at an arbitrary covered y. Throws Error(Span).
double phase_at(const PhaseProfile& phase, double y);

struct ProfileJet {
  double y = 0.0;
  double a = 0.0, da = 0.0, dda = 0.0;  // dda from the dense-output derivative
  double phi = 0.0;
  std::complex<double> q, dq, ddq;
};

/// Two-sided profile built from the amplitude equation.
class Profile {
 public:
  Profile(std::shared_ptr<const Trajectory> pos, std::shared_ptr<const Trajectory> neg,
          double phi0 = 0.0, int subdivisions = 1);

  static Profile solve(const InitialData& init, double y_max, const SolverConfig& cfg,
                       double phi0 = 0.0);

  const Trajectory& positive() const { return *pos_; }
  const Trajectory& negative() const { return *neg_; }
  std::shared_ptr<const Trajectory> positive_ptr() const { return pos_; }
  std::shared_ptr<const Trajectory> negative_ptr() const { return neg_; }
  const PhaseProfile& phase(OdeSide side) const {
    return side == OdeSide::PositiveY ? phase_pos_ : phase_neg_;
  }
  double phi0() const { return phi0_; }
  bool covers(double y) const;

  /// Q, Q', Q'' with φ' = y/4 - (3/4)A^2 and φ'' = 1/4 - (3/2)AA'.
  ProfileJet jet(double y) const;

 private:
  std::shared_ptr<const Trajectory> pos_, neg_;
  PhaseProfile phase_pos_, phase_neg_;
  double phi0_ = 0.0;
};

struct QSample {
  double y = 0.0;
  std::complex<double> q;
};

/// Q = A e^{iφ} at the nodes of both sides, sorted by y.
std::vector<QSample> reconstruct_q(const Profile& profile);

/// |Q'' - complex_profile_rhs(y, Q, Q')| at one point.
double profile_residual(const ProfileJet& j);

/// sup of profile_residual over a uniform grid of `points` on [lo, hi].
double profile_residual_sup(const Profile& profile, double lo, double hi, int points = 3001);

/// Eq. for Q as a real 2-component second-order system (Re Q, Im Q).
Trajectory integrate_complex_profile(std::complex<double> q0, std::complex<double> dq0,
                                     double y_start, double y_end, const SolverConfig& cfg);

/// sup over nodes of the direct complex trajectory of |Q_direct - A e^{iφ}|.
double complex_polar_mismatch(const Profile& profile, const Trajectory& direct);

struct PdeResidual {
  double sup = 0.0;
  double t_at = 0.0, x_at = 0.0;
};

/// sup over the grid of |i u_t + u_xx + i (|u|^2 u)_x| for u = t^{-1/4} Q(x/√t).
/// Throws Error(Span) if some x/√t is outside the profile, Error(Domain) if
/// some t < 1.
PdeResidual pde_residual(const Profile& profile, std::span<const double> t_grid,
                         std::span<const double> x_grid);

// ---------------------------------------------------------------------------
// Secular growth

struct SecularWindow {
  double w = 0.0;
  double envelope = 0.0;  // max |I| on [W, 2W]
  double slope = 0.0;     // max |I|/η on [W, 2W]
};

struct SecularReport {
  std::vector<SecularWindow> windows;
  /// envelope(2W) / envelope(W) for consecutive windows.
  std::vector<double> growth;
  double i_at_zero = 0.0;
};

/// I(η) = ∫_0^η sin(η - s) sin^3(s + ω_B) ds evaluated by quadrature on a
/// grid of spacing `step`.
double duhamel_integral(double omega_b, double eta, double step = 0.05);

/// Envelopes on the dyadic windows [W, 2W] for W in `ws`. eta_max must cover
/// 2 max(ws). Throws Error(Domain) otherwise.
SecularReport duhamel_secular(double omega_b, double eta_max, std::span<const double> ws,
                              double step = 0.05);

}  // namespace dnls
