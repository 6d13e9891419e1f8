#include "dnls/integrator.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <string>

#include "dnls/errors.hpp"

namespace dnls {

namespace {

// Dormand–Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                 a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
// Continuous extension (Hairer–Wanner, DOPRI5 contd5).
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

constexpr int kDenseTerms = 5;

// First-order form of the second-order system.
class FirstOrder {
 public:
  FirstOrder(const SecondOrderRhs& rhs, std::size_t dim) : rhs_(rhs), dim_(dim) {}

  void operator()(double y, std::span<const double> s, std::span<double> out) const {
    const auto x = s.first(dim_);
    const auto dx = s.subspan(dim_, dim_);
    std::copy(dx.begin(), dx.end(), out.begin());
    rhs_(y, x, dx, out.subspan(dim_, dim_));
  }

 private:
  const SecondOrderRhs& rhs_;
  std::size_t dim_;
};

struct Stages {
  explicit Stages(std::size_t n)
      : k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), tmp(n), y1(n), err(n) {}
  std::vector<double> k2, k3, k4, k5, k6, k7, tmp, y1, err;
};

// One DP5 step from (y, s0) with slope k1; fills st.y1, st.k7, st.err.
void dp5_step(const FirstOrder& f, double y, double h, std::span<const double> s0,
              std::span<const double> k1, Stages& st) {
  const std::size_t n = s0.size();
  auto& t = st.tmp;
  for (std::size_t i = 0; i < n; ++i) t[i] = s0[i] + h * a21 * k1[i];
  f(y + c2 * h, t, st.k2);
  for (std::size_t i = 0; i < n; ++i) t[i] = s0[i] + h * (a31 * k1[i] + a32 * st.k2[i]);
  f(y + c3 * h, t, st.k3);
  for (std::size_t i = 0; i < n; ++i)
    t[i] = s0[i] + h * (a41 * k1[i] + a42 * st.k2[i] + a43 * st.k3[i]);
  f(y + c4 * h, t, st.k4);
  for (std::size_t i = 0; i < n; ++i)
    t[i] = s0[i] + h * (a51 * k1[i] + a52 * st.k2[i] + a53 * st.k3[i] + a54 * st.k4[i]);
  f(y + c5 * h, t, st.k5);
  for (std::size_t i = 0; i < n; ++i)
    t[i] = s0[i] + h * (a61 * k1[i] + a62 * st.k2[i] + a63 * st.k3[i] + a64 * st.k4[i] +
                        a65 * st.k5[i]);
  f(y + h, t, st.k6);
  for (std::size_t i = 0; i < n; ++i)
    st.y1[i] = s0[i] + h * (a71 * k1[i] + a73 * st.k3[i] + a74 * st.k4[i] + a75 * st.k5[i] +
                            a76 * st.k6[i]);
  f(y + h, st.y1, st.k7);
  for (std::size_t i = 0; i < n; ++i)
    st.err[i] = h * (e1 * k1[i] + e3 * st.k3[i] + e4 * st.k4[i] + e5 * st.k5[i] +
                     e6 * st.k6[i] + e7 * st.k7[i]);
}

double error_norm(std::span<const double> err, std::span<const double> s0,
                  std::span<const double> s1, const SolverConfig& cfg) {
  double acc = 0.0;
  for (std::size_t i = 0; i < err.size(); ++i) {
    const double sc = cfg.abs_tol + cfg.rel_tol * std::max(std::abs(s0[i]), std::abs(s1[i]));
    const double r = err[i] / sc;
    acc += r * r;
  }
  return std::sqrt(acc / static_cast<double>(err.size()));
}

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

double step_cap(double y, const SolverConfig& cfg) { return cfg.max_step / (1.0 + std::abs(y)); }

// Hairer–Wanner starting step heuristic.
double initial_step(const FirstOrder& f, double y, std::span<const double> s0,
                    std::span<const double> k1, double dir, const SolverConfig& cfg) {
  const std::size_t n = s0.size();
  double d0 = 0.0, d1 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double sc = cfg.abs_tol + cfg.rel_tol * std::abs(s0[i]);
    d0 += (s0[i] / sc) * (s0[i] / sc);
    d1 += (k1[i] / sc) * (k1[i] / sc);
  }
  d0 = std::sqrt(d0 / n);
  d1 = std::sqrt(d1 / n);
  double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
  h0 = std::min(h0, step_cap(y, cfg));
  std::vector<double> s1(n), k2(n);
  for (std::size_t i = 0; i < n; ++i) s1[i] = s0[i] + dir * h0 * k1[i];
  f(y + dir * h0, s1, k2);
  double d2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double sc = cfg.abs_tol + cfg.rel_tol * std::abs(s0[i]);
    const double r = (k2[i] - k1[i]) / sc;
    d2 += r * r;
  }
  d2 = std::sqrt(d2 / n) / h0;
  const double dmax = std::max(d1, d2);
  const double h1 = dmax <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dmax, 0.2);
  return std::min({100.0 * h0, h1, step_cap(y, cfg)});
}

}  // namespace

const char* to_string(Termination t) {
  switch (t) {
    case Termination::ReachedEnd: return "reached_end";
    case Termination::Blowup: return "blowup";
    case Termination::StepCollapse: return "step_collapse";
  }
  return "unknown";
}

void SolverConfig::validate() const {
  const auto bad = [](const std::string& msg) { throw Error(ErrorKind::Config, msg); };
  if (!(rel_tol > 0.0) || !std::isfinite(rel_tol)) bad("rel_tol must be positive");
  if (!(abs_tol > 0.0) || !std::isfinite(abs_tol)) bad("abs_tol must be positive");
  if (!(max_step > 0.0) || !std::isfinite(max_step)) bad("max_step must be positive");
  if (!(blowup_threshold > 0.0)) bad("blowup_threshold must be positive");
  if (!(min_step > 0.0) || !(min_step < max_step)) bad("min_step must lie in (0, max_step)");
  if (max_samples < 2) bad("max_samples must be at least 2");
}

// ---------------------------------------------------------------------------
// Trajectory

std::span<const double> Trajectory::state(std::size_t i) const {
  return std::span<const double>(states_).subspan(i * 2 * dim_, 2 * dim_);
}

std::span<const double> Trajectory::derivative(std::size_t i) const {
  return std::span<const double>(derivs_).subspan(i * 2 * dim_, 2 * dim_);
}

bool Trajectory::covers(double y) const {
  if (ys_.empty()) return false;
  const double lo = std::min(ys_.front(), ys_.back());
  const double hi = std::max(ys_.front(), ys_.back());
  return y >= lo && y <= hi;
}

std::size_t Trajectory::locate(double y) const {
  if (!covers(y)) {
    throw Error(ErrorKind::Span, "y = " + std::to_string(y) + " outside trajectory span [" +
                                     std::to_string(ys_.front()) + ", " +
                                     std::to_string(ys_.back()) + "]");
  }
  if (ys_.size() == 1) return 0;
  std::size_t idx;
  if (direction_ == Direction::Forward) {
    idx = static_cast<std::size_t>(std::upper_bound(ys_.begin(), ys_.end(), y) - ys_.begin());
  } else {
    idx = static_cast<std::size_t>(
        std::upper_bound(ys_.begin(), ys_.end(), y, std::greater<double>()) - ys_.begin());
  }
  return std::min(idx == 0 ? 0 : idx - 1, ys_.size() - 2);
}

void Trajectory::sample_into(double y, std::span<double> out) const {
  const std::size_t i = locate(y);
  const std::size_t n = 2 * dim_;
  if (y == ys_[i] || ys_.size() == 1) {
    const auto s = state(i);
    std::copy(s.begin(), s.end(), out.begin());
    return;
  }
  if (y == ys_[i + 1]) {
    const auto s = state(i + 1);
    std::copy(s.begin(), s.end(), out.begin());
    return;
  }
  const double h = ys_[i + 1] - ys_[i];
  const double th = (y - ys_[i]) / h;
  const double th1 = 1.0 - th;
  const double* r = dense_.data() + i * kDenseTerms * n;
  for (std::size_t c = 0; c < n; ++c) {
    out[c] = r[c] + th * (r[n + c] + th1 * (r[2 * n + c] + th * (r[3 * n + c] + th1 * r[4 * n + c])));
  }
}

std::vector<double> Trajectory::sample(double y) const {
  std::vector<double> out(2 * dim_);
  sample_into(y, out);
  return out;
}

std::vector<double> Trajectory::sample_derivative(double y) const {
  const std::size_t i = locate(y);
  const std::size_t n = 2 * dim_;
  if (ys_.size() == 1) {
    const auto d = derivative(0);
    return {d.begin(), d.end()};
  }
  const double h = ys_[i + 1] - ys_[i];
  const double th = (y - ys_[i]) / h;
  const double th1 = 1.0 - th;
  const double* r = dense_.data() + i * kDenseTerms * n;
  std::vector<double> out(n);
  for (std::size_t c = 0; c < n; ++c) {
    const double r2 = r[n + c], r3 = r[2 * n + c], r4 = r[3 * n + c], r5 = r[4 * n + c];
    const double d = r4 + th1 * r5;
    const double dd = -r5;
    const double cc = r3 + th * d;
    const double dc = d + th * dd;
    const double b = r2 + th1 * cc;
    const double db = -cc + th1 * dc;
    out[c] = (b + th * db) / h;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Integration

Trajectory integrate(const SecondOrderRhs& rhs, std::span<const double> x0,
                     std::span<const double> dx0, double y_start, double y_end,
                     const SolverConfig& config) {
  config.validate();
  if (x0.size() != dx0.size() || x0.empty()) {
    throw Error(ErrorKind::Domain, "initial position and velocity must have equal nonzero size");
  }
  if (!std::isfinite(y_start) || !std::isfinite(y_end) || y_start == y_end) {
    throw Error(ErrorKind::Domain, "integration span must be finite and nondegenerate");
  }

  const std::size_t dim = x0.size();
  const std::size_t n = 2 * dim;
  const double dir = y_end > y_start ? 1.0 : -1.0;
  const FirstOrder f(rhs, dim);

  Trajectory traj;
  traj.dim_ = dim;
  traj.direction_ = dir > 0 ? Direction::Forward : Direction::Backward;

  std::vector<double> s(n), k1(n);
  std::copy(x0.begin(), x0.end(), s.begin());
  std::copy(dx0.begin(), dx0.end(), s.begin() + static_cast<std::ptrdiff_t>(dim));
  for (double v : s) {
    if (!std::isfinite(v)) throw Error(ErrorKind::Domain, "initial state must be finite");
  }
  double y = y_start;
  f(y, s, k1);

  traj.ys_.push_back(y);
  traj.states_.insert(traj.states_.end(), s.begin(), s.end());
  traj.derivs_.insert(traj.derivs_.end(), k1.begin(), k1.end());
  traj.peak_ = max_abs(s);
  if (traj.peak_ > config.blowup_threshold) {
    traj.termination_ = Termination::Blowup;
    return traj;
  }

  Stages st(n);
  double h = initial_step(f, y, s, k1, dir, config);
  bool last_rejected = false;

  while (dir * (y_end - y) > 0.0) {
    const double remaining = std::abs(y_end - y);
    h = std::min(h, step_cap(y, config));
    if (h < config.min_step && remaining > config.min_step) {
      traj.termination_ = Termination::StepCollapse;
      return traj;
    }
    const bool final_step = h >= remaining;
    if (final_step) h = remaining;
    const double hs = dir * h;

    dp5_step(f, y, hs, s, k1, st);
    const double err = error_norm(st.err, s, st.y1, config);
    bool finite = std::isfinite(err);
    for (double v : st.y1) finite = finite && std::isfinite(v);

    if (finite && err <= 1.0) {
      if (traj.ys_.size() >= config.max_samples) {
        throw Error(ErrorKind::SampleLimit,
                    "max_samples (" + std::to_string(config.max_samples) + ") exceeded at y = " +
                        std::to_string(y));
      }
      // Dense output coefficients for this step, stored as five blocks of n.
      const std::size_t base = traj.dense_.size();
      traj.dense_.resize(base + kDenseTerms * n);
      double* r = traj.dense_.data() + base;
      for (std::size_t i = 0; i < n; ++i) {
        const double dy = st.y1[i] - s[i];
        const double bspl = hs * k1[i] - dy;
        r[i] = s[i];
        r[n + i] = dy;
        r[2 * n + i] = bspl;
        r[3 * n + i] = dy - hs * st.k7[i] - bspl;
        r[4 * n + i] = hs * (d1 * k1[i] + d3 * st.k3[i] + d4 * st.k4[i] + d5 * st.k5[i] +
                             d6 * st.k6[i] + d7 * st.k7[i]);
      }

      y = final_step ? y_end : y + hs;
      s = st.y1;
      k1 = st.k7;  // FSAL
      traj.ys_.push_back(y);
      traj.states_.insert(traj.states_.end(), s.begin(), s.end());
      traj.derivs_.insert(traj.derivs_.end(), k1.begin(), k1.end());

      const double mag = max_abs(s);
      traj.peak_ = std::max(traj.peak_, mag);
      if (mag > config.blowup_threshold) {
        traj.termination_ = Termination::Blowup;
        return traj;
      }

      double fac = err > 0.0 ? 0.9 * std::pow(err, -0.2) : 10.0;
      fac = std::clamp(fac, 0.2, last_rejected ? 1.0 : 10.0);
      h *= fac;
      last_rejected = false;
    } else {
      const double fac = finite ? std::clamp(0.9 * std::pow(err, -0.2), 0.1, 0.9) : 0.1;
      h *= fac;
      last_rejected = true;
    }
  }
  traj.termination_ = Termination::ReachedEnd;
  return traj;
}

Trajectory integrate_scalar(ScalarRhs rhs, const InitialData& init, double y_start,
                            double y_end, const SolverConfig& config) {
  init.validate();
  const SecondOrderRhs wrapped = [rhs](double y, std::span<const double> x,
                                       std::span<const double> dx, std::span<double> ddx) {
    ddx[0] = rhs(y, x[0], dx[0]);
  };
  const std::array<double, 1> x0{init.a0}, dx0{init.a1};
  return integrate(wrapped, x0, dx0, y_start, y_end, config);
}

std::vector<double> integrate_fixed(const SecondOrderRhs& rhs, std::span<const double> x0,
                                    std::span<const double> dx0, double y_start, double y_end,
                                    int steps) {
  if (steps < 1 || x0.size() != dx0.size() || x0.empty()) {
    throw Error(ErrorKind::Domain, "integrate_fixed: bad arguments");
  }
  const std::size_t dim = x0.size();
  const std::size_t n = 2 * dim;
  const FirstOrder f(rhs, dim);
  std::vector<double> s(n), k1(n);
  std::copy(x0.begin(), x0.end(), s.begin());
  std::copy(dx0.begin(), dx0.end(), s.begin() + static_cast<std::ptrdiff_t>(dim));
  Stages st(n);
  const double h = (y_end - y_start) / steps;
  double y = y_start;
  f(y, s, k1);
  for (int i = 0; i < steps; ++i) {
    dp5_step(f, y, h, s, k1, st);
    s = st.y1;
    k1 = st.k7;
    y = y_start + (i + 1) * h;
  }
  return s;
}

Trajectory solve_amplitude(const InitialData& init, OdeSide side, double y_max,
                           const SolverConfig& config) {
  if (!(y_max > 0.0)) throw Error(ErrorKind::Domain, "y_max must be positive");
  const double end = side == OdeSide::PositiveY ? y_max : -y_max;
  return integrate_scalar(amplitude_rhs, init, 0.0, end, config);
}

BlowupReport detect_blowup(const InitialData& init, OdeSide side, const SolverConfig& config,
                           double y_max) {
  if (!(y_max > 0.0)) throw Error(ErrorKind::Domain, "detect_blowup requires y_max > 0");
  const Trajectory traj =
      side == OdeSide::PositiveY
          ? integrate_scalar(amplitude_rhs, init, 0.0, y_max, config)
          : integrate_scalar(reflected_rhs, init.reflected(), 0.0, y_max, config);
  BlowupReport rep;
  rep.termination = traj.termination();
  rep.y_reached = traj.y_reached();
  rep.peak_magnitude = traj.peak_magnitude();
  rep.triggered = traj.termination() == Termination::Blowup;
  if (rep.triggered) rep.location = traj.y_reached();
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const double y = traj.node(i);
    rep.weighted_peak =
        std::max(rep.weighted_peak, std::pow(1.0 + y * y, 0.25) * std::abs(traj.state(i)[0]));
  }
  return rep;
}

}  // namespace dnls
