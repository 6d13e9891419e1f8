#include "dnls/asymptotics.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "dnls/errors.hpp"
#include "quadrature.hpp"

namespace dnls {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kMinR = 1e-10;
}  // namespace

// ---------------------------------------------------------------------------
// Polar form

PolarPath polar_decompose(std::span<const double> etas, std::span<const double> b,
                          std::span<const double> db, std::span<const double> ddb) {
  const std::size_t n = etas.size();
  if (b.size() != n || db.size() != n || (!ddb.empty() && ddb.size() != n)) {
    throw Error(ErrorKind::Domain, "polar_decompose: mismatched lengths");
  }
  PolarPath p;
  p.etas.assign(etas.begin(), etas.end());
  p.r.resize(n);
  p.omega.resize(n);
  if (!ddb.empty()) p.domega.resize(n);
  p.min_r = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    const double r = std::hypot(b[i], db[i]);
    if (!(r >= kMinR)) {
      throw Error(ErrorKind::Degenerate,
                  "R = " + std::to_string(r) + " at eta = " + std::to_string(etas[i]) +
                      "; phase undefined");
    }
    p.r[i] = r;
    p.min_r = std::min(p.min_r, r);
    const double raw = std::atan2(db[i], b[i]);
    p.omega[i] = i == 0 ? raw : raw + kTwoPi * std::round((p.omega[i - 1] - raw) / kTwoPi);
    if (!ddb.empty()) p.domega[i] = (b[i] * ddb[i] - db[i] * db[i]) / (r * r);
  }
  return p;
}

PolarPath polar_decompose(const BPath& path) {
  std::vector<double> e, b, db, ddb;
  e.reserve(path.size());
  b.reserve(path.size());
  db.reserve(path.size());
  ddb.reserve(path.size());
  for (const auto& p : path.nodes()) {
    e.push_back(p.eta);
    b.push_back(p.b);
    db.push_back(p.db);
    ddb.push_back(p.ddb);
  }
  PolarPath out = polar_decompose(e, b, db, ddb);
  out.sign = path.sign();
  return out;
}

double phase_correction_coeff(CubicSign sign) {
  return sign == CubicSign::PlusCubic ? 0.5 : -0.5;
}

PhaseResidual phase_ode_residual(const PolarPath& polar, double q_limit, double coeff,
                                 double eta_lo, double eta_hi) {
  if (polar.domega.size() != polar.etas.size()) {
    throw Error(ErrorKind::Domain, "polar path carries no phase derivative");
  }
  PhaseResidual r;
  const double mid = std::sqrt(eta_lo * eta_hi);
  const double q2 = q_limit * q_limit;
  for (std::size_t i = 0; i < polar.etas.size(); ++i) {
    const double eta = polar.etas[i];
    if (eta < eta_lo || eta > eta_hi) continue;
    const double c = std::cos(polar.omega[i]);
    const double c4 = c * c * c * c;
    const double v = eta * std::sqrt(eta) * std::abs(polar.domega[i] + 1.0 - coeff * q2 * c4 / eta);
    r.constant = std::max(r.constant, v);
    if (eta >= mid) r.constant_outer = std::max(r.constant_outer, v);
  }
  return r;
}

double derived_log_coeff(OdeSide side, double q_limit) {
  return (side == OdeSide::PositiveY ? 3.0 : -3.0) / 16.0 * q_limit * q_limit;
}

double expected_log_coeff(OdeSide side, double q_limit) {
  return (side == OdeSide::PositiveY ? 3.0 : -3.0) / 8.0 * q_limit * q_limit;
}

AsymptoticFit fit_asymptotics(const PolarPath& polar, double eta_lo, double eta_hi,
                              OdeSide side) {
  if (!(eta_lo >= 10.0)) throw Error(ErrorKind::Domain, "fit window must start at eta >= 10");
  if (!(eta_hi >= 10.0 * eta_lo)) {
    throw Error(ErrorKind::IllConditioned, "fit window spans less than one decade");
  }
  if (polar.etas.empty() || polar.etas.front() > eta_lo ||
      polar.etas.back() < eta_hi * (1.0 - 1e-12)) {
    throw Error(ErrorKind::Span, "fit window not covered by the polar path");
  }
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < polar.etas.size(); ++i) {
    if (polar.etas[i] >= eta_lo && polar.etas[i] <= eta_hi) idx.push_back(i);
  }
  const std::size_t n = idx.size();
  if (n < 8) throw Error(ErrorKind::IllConditioned, "too few nodes in the fit window");

  AsymptoticFit fit;
  fit.side = side;
  fit.eta_lo = eta_lo;
  fit.eta_hi = eta_hi;

  // trapezoid mean of R^2 in η
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const std::size_t i = idx[k], j = idx[k + 1];
    const double h = polar.etas[j] - polar.etas[i];
    num += 0.5 * h * (polar.r[i] * polar.r[i] + polar.r[j] * polar.r[j]);
    den += h;
  }
  fit.q_limit = std::sqrt(num / den);
  if (!(fit.q_limit > kMinR)) throw Error(ErrorKind::Degenerate, "amplitude limit vanishes");

  Eigen::MatrixXd m(n, 3);
  Eigen::VectorXd rhs(n);
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t i = idx[k];
    const double eta = polar.etas[i];
    const double lo = polar.etas[k == 0 ? i : idx[k - 1]];
    const double hi = polar.etas[k + 1 == n ? i : idx[k + 1]];
    const double w = std::sqrt(0.5 * (hi - lo) / eta);
    m(static_cast<Eigen::Index>(k), 0) = w;
    m(static_cast<Eigen::Index>(k), 1) = w * std::log(eta);
    m(static_cast<Eigen::Index>(k), 2) = w * (eta_lo / eta);
    rhs(static_cast<Eigen::Index>(k)) = w * (polar.omega[i] + eta);
  }
  const Eigen::Vector3d c = m.colPivHouseholderQr().solve(rhs);
  fit.omega0 = c(0);
  fit.log_coeff = c(1);
  fit.inv_coeff = c(2) * eta_lo;

  const double mid = std::sqrt(eta_lo * eta_hi);
  for (std::size_t i : idx) {
    const double eta = polar.etas[i];
    const double res = std::abs(polar.omega[i] + eta -
                                (fit.omega0 + fit.log_coeff * std::log(eta) + fit.inv_coeff / eta));
    fit.residual_sup = std::max(fit.residual_sup, res);
    if (eta < mid) {
      fit.residual_inner = std::max(fit.residual_inner, res);
    } else {
      fit.residual_outer = std::max(fit.residual_outer, res);
    }
  }
  return fit;
}

TailConvergence tail_convergence(const std::function<double(double)>& f, double lo, double hi,
                                 double panel) {
  if (!(hi > lo) || !(panel > 0.0)) throw Error(ErrorKind::Domain, "bad tail window");
  const auto count = static_cast<std::size_t>(std::ceil((hi - lo) / panel));
  const double h = (hi - lo) / static_cast<double>(count);
  std::vector<double> pieces(count);
  for (std::size_t k = 0; k < count; ++k) {
    const double a = lo + static_cast<double>(k) * h;
    pieces[k] = detail::gauss_legendre(f, a, k + 1 == count ? hi : a + h);
  }
  TailConvergence out;
  double suffix = 0.0;
  for (std::size_t k = count; k-- > 0;) {
    suffix += pieces[k];
    const double eta = lo + static_cast<double>(k) * h;
    out.constant = std::max(out.constant, eta * std::abs(suffix));
  }
  out.total = suffix;
  return out;
}

TailReport oscillatory_tail_decay(const BPath& path, double eta_lo, double eta_hi) {
  if (!(eta_lo >= path.eta_min() && eta_hi <= path.eta_max() && eta_hi > eta_lo)) {
    throw Error(ErrorKind::Span, "tail window outside the B path");
  }
  TailReport rep;
  rep.eta_valid = eta_hi;
  for (const auto& p : path.nodes()) {
    if (p.eta < eta_lo || p.eta > eta_hi) continue;
    const double r2 = p.b * p.b + p.db * p.db;
    if (r2 == 0.0 || (p.b * p.ddb - p.db * p.db) / r2 >= -0.5) {
      rep.assumption_held = false;
      rep.eta_valid = p.eta;
      break;
    }
  }
  if (!(rep.eta_valid > eta_lo)) {
    throw Error(ErrorKind::Domain, "phase speed assumption fails at the start of the window");
  }
  auto cos2 = [&](double z) {
    const BPoint p = path.at(z);
    return (p.b * p.b - p.db * p.db) / (p.b * p.b + p.db * p.db);
  };
  const auto t2 = tail_convergence([&](double z) { return cos2(z) / z; }, eta_lo, rep.eta_valid);
  const auto t4 = tail_convergence(
      [&](double z) {
        const double c = cos2(z);
        return (2.0 * c * c - 1.0) / z;
      },
      eta_lo, rep.eta_valid);
  rep.i_cos2 = t2.total;
  rep.i_cos4 = t4.total;
  rep.c_cos2 = t2.constant;
  rep.c_cos4 = t4.constant;
  return rep;
}

// ---------------------------------------------------------------------------
// Phase

namespace {

double a_squared_integral(const Trajectory& amp, double a, double b, int pieces) {
  return detail::gauss_legendre(
      [&](double y) {
        double buf[2];
        amp.sample_into(y, std::span<double>(buf, 2));
        return buf[0] * buf[0];
      },
      a, b, pieces);
}

}  // namespace

PhaseProfile phase_integral(std::shared_ptr<const Trajectory> amp, double phi0, int subdivisions) {
  if (subdivisions < 1) throw Error(ErrorKind::Domain, "subdivisions must be >= 1");
  if (amp->size() == 0 || amp->y_start() != 0.0) {
    throw Error(ErrorKind::Span, "phase_integral needs a trajectory starting at y = 0");
  }
  PhaseProfile ph;
  ph.phi0 = phi0;
  ph.subdivisions = subdivisions;
  ph.ys.assign(amp->nodes().begin(), amp->nodes().end());
  ph.phi.resize(ph.ys.size());
  double cum = 0.0;
  ph.phi[0] = phi0;
  for (std::size_t i = 1; i < ph.ys.size(); ++i) {
    cum += a_squared_integral(*amp, ph.ys[i - 1], ph.ys[i], subdivisions);
    ph.phi[i] = phi0 + ph.ys[i] * ph.ys[i] / 8.0 - 0.75 * cum;
  }
  ph.source = std::move(amp);
  return ph;
}

double phase_at(const PhaseProfile& phase, double y) {
  const std::size_t i = phase.source->locate(y);
  const double yi = phase.ys[i];
  if (y == yi) return phase.phi[i];
  return phase.phi[i] + (y * y - yi * yi) / 8.0 -
         0.75 * a_squared_integral(*phase.source, yi, y, phase.subdivisions);
}

// ---------------------------------------------------------------------------
// Profile

Profile::Profile(std::shared_ptr<const Trajectory> pos, std::shared_ptr<const Trajectory> neg,
                 double phi0, int subdivisions)
    : pos_(std::move(pos)), neg_(std::move(neg)), phi0_(phi0) {
  phase_pos_ = phase_integral(pos_, phi0, subdivisions);
  phase_neg_ = phase_integral(neg_, phi0, subdivisions);
}

Profile Profile::solve(const InitialData& init, double y_max, const SolverConfig& cfg,
                       double phi0) {
  auto pos = std::make_shared<const Trajectory>(
      solve_amplitude(init, OdeSide::PositiveY, y_max, cfg));
  auto neg = std::make_shared<const Trajectory>(
      solve_amplitude(init, OdeSide::NegativeY, y_max, cfg));
  return Profile(std::move(pos), std::move(neg), phi0);
}

bool Profile::covers(double y) const { return y >= 0.0 ? pos_->covers(y) : neg_->covers(y); }

ProfileJet Profile::jet(double y) const {
  const Trajectory& t = y >= 0.0 ? *pos_ : *neg_;
  const PhaseProfile& ph = y >= 0.0 ? phase_pos_ : phase_neg_;
  ProfileJet j;
  j.y = y;
  double st[2];
  t.sample_into(y, std::span<double>(st, 2));
  const auto d = t.sample_derivative(y);
  j.a = st[0];
  j.da = st[1];
  j.dda = d[1];
  j.phi = phase_at(ph, y);
  const double dphi = y / 4.0 - 0.75 * j.a * j.a;
  const double ddphi = 0.25 - 1.5 * j.a * j.da;
  constexpr std::complex<double> i{0.0, 1.0};
  const std::complex<double> e = std::polar(1.0, j.phi);
  j.q = j.a * e;
  j.dq = (j.da + i * j.a * dphi) * e;
  j.ddq = (j.dda + 2.0 * i * j.da * dphi + i * j.a * ddphi - j.a * dphi * dphi) * e;
  return j;
}

std::vector<QSample> reconstruct_q(const Profile& profile) {
  std::vector<QSample> out;
  const auto add = [&](const Trajectory& t, const PhaseProfile& ph, bool skip_origin) {
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (skip_origin && i == 0) continue;
      out.push_back({t.node(i), t.state(i)[0] * std::polar(1.0, ph.phi[i])});
    }
  };
  add(profile.negative(), profile.phase(OdeSide::NegativeY), false);
  std::reverse(out.begin(), out.end());
  add(profile.positive(), profile.phase(OdeSide::PositiveY), true);
  return out;
}

double profile_residual(const ProfileJet& j) {
  return std::abs(j.ddq - complex_profile_rhs(j.y, j.q, j.dq));
}

double profile_residual_sup(const Profile& profile, double lo, double hi, int points) {
  if (points < 2) throw Error(ErrorKind::Domain, "need at least two residual points");
  double sup = 0.0;
  for (int k = 0; k < points; ++k) {
    const double y = lo + (hi - lo) * k / (points - 1);
    sup = std::max(sup, profile_residual(profile.jet(y)));
  }
  return sup;
}

Trajectory integrate_complex_profile(std::complex<double> q0, std::complex<double> dq0,
                                     double y_start, double y_end, const SolverConfig& cfg) {
  const SecondOrderRhs rhs = [](double y, std::span<const double> x, std::span<const double> dx,
                                std::span<double> ddx) {
    const auto r = complex_profile_rhs(y, {x[0], x[1]}, {dx[0], dx[1]});
    ddx[0] = r.real();
    ddx[1] = r.imag();
  };
  const std::array<double, 2> x{q0.real(), q0.imag()}, dx{dq0.real(), dq0.imag()};
  return integrate(rhs, x, dx, y_start, y_end, cfg);
}

double complex_polar_mismatch(const Profile& profile, const Trajectory& direct) {
  double sup = 0.0;
  for (std::size_t i = 0; i < direct.size(); ++i) {
    const double y = direct.node(i);
    const auto s = direct.state(i);
    const Trajectory& t = y >= 0.0 ? profile.positive() : profile.negative();
    double st[2];
    t.sample_into(y, std::span<double>(st, 2));
    const double phi = phase_at(profile.phase(y >= 0.0 ? OdeSide::PositiveY : OdeSide::NegativeY), y);
    sup = std::max(sup, std::abs(std::complex<double>(s[0], s[1]) - st[0] * std::polar(1.0, phi)));
  }
  return sup;
}

PdeResidual pde_residual(const Profile& profile, std::span<const double> t_grid,
                         std::span<const double> x_grid) {
  constexpr std::complex<double> i{0.0, 1.0};
  PdeResidual out;
  for (double t : t_grid) {
    if (!(t >= 1.0)) throw Error(ErrorKind::Domain, "pde_residual requires t >= 1");
    const double st = std::sqrt(t);
    const double amp = std::pow(t, -0.25);
    for (double x : x_grid) {
      const double y = x / st;
      if (!profile.covers(y)) {
        throw Error(ErrorKind::Span, "x/sqrt(t) = " + std::to_string(y) + " outside the profile");
      }
      const ProfileJet j = profile.jet(y);
      // u = t^{-1/4} Q(y), y_t = -y/(2t), y_x = 1/sqrt(t)
      const std::complex<double> u = amp * j.q;
      const std::complex<double> ut = amp * (-0.25 * j.q / t - 0.5 * y * j.dq / t);
      const std::complex<double> ux = amp * j.dq / st;
      const std::complex<double> uxx = amp * j.ddq / t;
      const std::complex<double> nx = 2.0 * std::norm(u) * ux + u * u * std::conj(ux);
      const double r = std::abs(i * ut + uxx + i * nx);
      if (r > out.sup) {
        out.sup = r;
        out.t_at = t;
        out.x_at = x;
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Secular growth

namespace {

// I on the grid 0, h, 2h, ..., using sin(η - s) = sin η cos s - cos η sin s.
std::vector<double> duhamel_grid(double omega_b, double eta_max, double step, double& h) {
  const auto n = static_cast<std::size_t>(std::ceil(eta_max / step));
  h = eta_max / static_cast<double>(n);
  std::vector<double> out(n + 1, 0.0);
  double c = 0.0, s = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double a = static_cast<double>(k) * h;
    c += detail::gauss_legendre(
        [&](double x) { const double f = std::sin(x + omega_b); return std::cos(x) * f * f * f; },
        a, a + h);
    s += detail::gauss_legendre(
        [&](double x) { const double f = std::sin(x + omega_b); return std::sin(x) * f * f * f; },
        a, a + h);
    const double eta = a + h;
    out[k + 1] = std::sin(eta) * c - std::cos(eta) * s;
  }
  return out;
}

}  // namespace

double duhamel_integral(double omega_b, double eta, double step) {
  if (!(eta >= 0.0)) throw Error(ErrorKind::Domain, "duhamel_integral requires eta >= 0");
  if (eta == 0.0) return 0.0;
  double h = 0.0;
  return duhamel_grid(omega_b, eta, step, h).back();
}

SecularReport duhamel_secular(double omega_b, double eta_max, std::span<const double> ws,
                              double step) {
  if (!(eta_max > 0.0)) throw Error(ErrorKind::Domain, "eta_max must be positive");
  for (double w : ws) {
    if (!(w > 0.0) || 2.0 * w > eta_max * (1.0 + 1e-12)) {
      throw Error(ErrorKind::Domain, "window [W, 2W] not inside (0, eta_max]");
    }
  }
  double h = 0.0;
  const auto grid = duhamel_grid(omega_b, eta_max, step, h);
  SecularReport rep;
  rep.i_at_zero = grid.front();
  for (double w : ws) {
    SecularWindow win;
    win.w = w;
    for (std::size_t k = 0; k < grid.size(); ++k) {
      const double eta = static_cast<double>(k) * h;
      if (eta < w || eta > 2.0 * w) continue;
      win.envelope = std::max(win.envelope, std::abs(grid[k]));
      win.slope = std::max(win.slope, std::abs(grid[k]) / eta);
    }
    rep.windows.push_back(win);
  }
  for (std::size_t k = 1; k < rep.windows.size(); ++k) {
    rep.growth.push_back(rep.windows[k].envelope / rep.windows[k - 1].envelope);
  }
  return rep;
}

}  // namespace dnls
