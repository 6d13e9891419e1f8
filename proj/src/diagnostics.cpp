#include "dnls/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "dnls/errors.hpp"
#include "quadrature.hpp"

namespace dnls {

double energy_e1(double y, double a, double da) {
  const double a2 = a * a;
  return 0.5 * da * da + (y * y / 32.0) * a2 + (y / 16.0) * a2 * a2 + a2 * a2 * a2 / 32.0;
}

double energy_e3(double y, double a, double da) {
  const double a2 = a * a;
  return 0.5 * da * da + (y * y / 32.0) * a2 - (y / 16.0) * a2 * a2 + a2 * a2 * a2 / 32.0;
}

namespace {

double second_energy(double base, double y, double a, double da) {
  return base / y + a * da / (2.0 * y * y) + a * a / (2.0 * y * y * y);
}

void require_positive(double y, const char* what) {
  if (!(y > 0.0)) throw Error(ErrorKind::Domain, std::string(what) + " requires y > 0");
}

}  // namespace

double energy_e2(double y, double a, double da) {
  require_positive(y, "energy_e2");
  return second_energy(energy_e1(y, a, da), y, a, da);
}

double energy_e4(double y, double a, double da) {
  require_positive(y, "energy_e4");
  return second_energy(energy_e3(y, a, da), y, a, da);
}

EnergySample energy_sample(double y, double a, double da) {
  EnergySample s;
  s.y = y;
  s.e1 = energy_e1(y, a, da);
  s.e3 = energy_e3(y, a, da);
  if (y > 0.0) {
    s.e2 = energy_e2(y, a, da);
    s.e4 = energy_e4(y, a, da);
  }
  return s;
}

// ---------------------------------------------------------------------------
// E_B

namespace {

double eb_sign(CubicSign sign) { return sign == CubicSign::PlusCubic ? -1.0 : 1.0; }

double eb_flux(const BPoint& p, double s) {
  const double b2 = p.b * p.b;
  return s * b2 * b2 / 8.0 + (3.0 / 16.0) * p.b * p.db + (3.0 / 64.0) * b2 * b2 * p.b * p.db;
}

double eb_local(const BPoint& p, double s) {
  const double b2 = p.b * p.b;
  return 0.5 * p.db * p.db + 0.5 * b2 + s * b2 * b2 / (8.0 * p.eta);
}

double tail_piece(const BPath& path, double s, double lo, double hi) {
  if (!(hi > lo)) return 0.0;
  return detail::gauss_legendre(
      [&](double z) { return eb_flux(path.at(z), s) / (z * z); }, lo, hi);
}

double tail_remainder(const BPath& path, double eta_max) {
  double sup = 0.0;
  for (const auto& p : path.nodes()) {
    const double ab = std::abs(p.b), adb = std::abs(p.db);
    sup = std::max(sup, ab * ab * ab * ab / 8.0 + (3.0 / 16.0) * ab * adb +
                            (3.0 / 64.0) * ab * ab * ab * ab * ab * adb);
  }
  return sup / eta_max;
}

void check_eta_max(const BPath& path, double eta_max) {
  if (!(eta_max >= path.eta_min() && eta_max <= path.eta_max())) {
    throw Error(ErrorKind::Span, "eta_max = " + std::to_string(eta_max) + " outside B path");
  }
}

}  // namespace

std::vector<EbValue> energy_eb_profile(const BPath& path, double eta_max) {
  check_eta_max(path, eta_max);
  const double s = eb_sign(path.sign());
  const auto& nodes = path.nodes();
  std::size_t k = 0;
  while (k + 1 < nodes.size() && nodes[k + 1].eta <= eta_max) ++k;
  const double rem = tail_remainder(path, eta_max);
  std::vector<EbValue> out(k + 1);
  double tail = tail_piece(path, s, nodes[k].eta, eta_max);
  for (std::size_t i = k + 1; i-- > 0;) {
    if (i < k) tail += tail_piece(path, s, nodes[i].eta, nodes[i + 1].eta);
    const auto& p = nodes[i];
    const double b2 = p.b * p.b;
    out[i].f_b = s * b2 * b2 / (8.0 * p.eta) - tail;
    out[i].value = eb_local(p, s) - tail;
    out[i].remainder = rem;
  }
  return out;
}

EbValue energy_eb(double eta, const BPath& path, double eta_max) {
  check_eta_max(path, eta_max);
  if (!(eta >= path.eta_min() && eta <= eta_max)) {
    throw Error(ErrorKind::Span, "eta = " + std::to_string(eta) + " outside [eta_min, eta_max]");
  }
  const double s = eb_sign(path.sign());
  const auto& nodes = path.nodes();
  // first node strictly above eta
  auto it = std::upper_bound(nodes.begin(), nodes.end(), eta,
                             [](double e, const BPoint& p) { return e < p.eta; });
  double tail = 0.0;
  double cursor = eta;
  for (; it != nodes.end() && it->eta <= eta_max; ++it) {
    tail += tail_piece(path, s, cursor, it->eta);
    cursor = it->eta;
  }
  tail += tail_piece(path, s, cursor, eta_max);
  const BPoint p = path.at(eta);
  const double b2 = p.b * p.b;
  EbValue v;
  v.f_b = s * b2 * b2 / (8.0 * eta) - tail;
  v.value = eb_local(p, s) - tail;
  v.remainder = tail_remainder(path, eta_max);
  return v;
}

EbReport eb_report(const BPath& path, double eta_lo, double eta_hi) {
  const auto prof = energy_eb_profile(path, eta_hi);
  EbReport r;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo, sum = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < prof.size(); ++i) {
    const double eta = path[i].eta;
    if (eta < eta_lo) continue;
    lo = std::min(lo, prof[i].value);
    hi = std::max(hi, prof[i].value);
    sum += prof[i].value;
    ++count;
    r.fb_constant = std::max(r.fb_constant, eta * std::abs(prof[i].f_b));
    r.remainder = prof[i].remainder;
  }
  if (count == 0) throw Error(ErrorKind::Span, "no B-path nodes in the E_B window");
  r.mean = sum / static_cast<double>(count);
  r.spread = hi - lo;
  return r;
}

// ---------------------------------------------------------------------------
// Monotonicity

namespace {

// Terms of dE/dy for E = p^2/2 + y^2 a^2/32 + q y a^4/16 + a^6/32 along
// a'' = acc, with q = +1 (E1) or -1 (E3). Returned separately so the caller
// can form both the sum and the magnitude scale.
struct EnergyRate {
  double e = 0.0;
  double de = 0.0;
  double scale = 0.0;  // Σ |terms| of de
};

EnergyRate energy_rate(double y, double a, double p, double acc, double q) {
  const double a2 = a * a, a4 = a2 * a2;
  const double ty = y * a2 / 16.0 + q * a4 / 16.0;
  const double ta = (y * y * a / 16.0 + q * y * a * a2 / 4.0 + 3.0 * a4 * a / 16.0) * p;
  const double tp = p * acc;
  EnergyRate r;
  r.e = 0.5 * p * p + (y * y / 32.0) * a2 + q * (y / 16.0) * a4 + a4 * a2 / 32.0;
  r.de = ty + ta + tp;
  r.scale = std::abs(y * a2 / 16.0) + a4 / 16.0 + std::abs(ta) + std::abs(tp);
  return r;
}

struct Rates {
  double first = 0.0, first_scale = 0.0;    // d/dy(E/y^2)
  double second = 0.0, second_scale = 0.0;  // d/dy(E/y + a p/(2y^2) + a^2/(2y^3))
};

Rates rates(double y, double a, double p, double acc, double q) {
  const EnergyRate r = energy_rate(y, a, p, acc, q);
  const double y2 = y * y, y3 = y2 * y, y4 = y3 * y;
  Rates out;
  out.first = r.de / y2 - 2.0 * r.e / y3;
  out.first_scale = r.scale / y2 + 2.0 * std::abs(r.e) / y3;
  const double terms[] = {-r.e / y2,   p * p / (2.0 * y2), a * acc / (2.0 * y2),
                          -a * p / y3, a * p / y3,         -1.5 * a * a / y4};
  out.second = r.de / y;
  out.second_scale = r.scale / y;
  for (double t : terms) {
    out.second += t;
    out.second_scale += std::abs(t);
  }
  return out;
}

void update(InequalityCheck& c, double y, double value, double bound, double closed,
            double scale) {
  ++c.evaluated;
  if (scale <= 0.0) return;
  const double v = (value - bound) / scale;
  if (v > c.max_relative_violation) {
    c.max_relative_violation = v;
    c.worst_y = y;
  }
  c.closed_form_mismatch = std::max(c.closed_form_mismatch, std::abs(value - closed) / scale);
}

}  // namespace

MonotonicityReport monotonicity_report(const Trajectory& traj, OdeSide side) {
  MonotonicityReport rep;
  rep.side = side;
  const bool reflected = side == OdeSide::NegativeY;
  rep.first.name = reflected ? "d/dy(E1/y^2) <= 0" : "d/dy(E3/y^2) <= A^4/(16y^2)";
  rep.second.name = reflected ? "E2' <= 0" : "E4' <= A^4/(8y)";
  if (reflected) {
    const auto n1 = first_zero(traj, 0);
    if (!n1) return rep;
    rep.y_from = *n1;
  } else {
    rep.y_from = 1.0 / 3.0;
  }
  const double q = reflected ? 1.0 : -1.0;
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const double y = traj.node(i);
    if (y < rep.y_from || y <= 0.0) continue;
    const auto st = traj.state(i);
    const double a = st[0], p = st[1];
    const double acc = reflected ? reflected_rhs(y, a, p) : amplitude_rhs(y, a, p);
    const Rates r = rates(y, a, p, acc, q);
    const double a2 = a * a, a4 = a2 * a2, a6 = a4 * a2;
    const double y2 = y * y, y3 = y2 * y, y4 = y3 * y;
    // closed forms after eliminating a''
    const double c1 = -p * p / y3 - q * a4 / (16.0 * y2) - a6 / (16.0 * y3);
    const double c2 = -a6 / (8.0 * y2) - q * a4 / (8.0 * y) - 1.5 * a2 / y4;
    const double b1 = reflected ? 0.0 : a4 / (16.0 * y2);
    const double b2 = reflected ? 0.0 : a4 / (8.0 * y);
    update(rep.first, y, r.first, b1, c1, r.first_scale);
    update(rep.second, y, r.second, b2, c2, r.second_scale);
  }
  return rep;
}

std::optional<BoundCheck> reflected_energy_bound(const Trajectory& traj, double a0) {
  const auto n1 = first_zero(traj, 0);
  if (!n1) return std::nullopt;
  BoundCheck c;
  c.n1 = *n1;
  const double n = c.n1, a2 = a0 * a0, a4 = a2 * a2, a6 = a4 * a2;
  const double head = n * a2 / 32.0 + a4 / 16.0 + a6 / (32.0 * n);
  c.bound_statement =
      head + a0 / (2.0 * n) * std::sqrt(a2 / 16.0 + a4 / (8.0 * n) + a6 / (16.0 * n * n));
  c.bound_proof = head + a0 / (2.0 * n) * std::sqrt(a2 / 16.0 + a4 / (8.0 * n) + a6 / (16.0 * n));
  c.margin_statement = c.margin_proof = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const double y = traj.node(i);
    if (y <= n) continue;
    const auto st = traj.state(i);
    const double lhs = st[1] * st[1] / (2.0 * y) + y * st[0] * st[0] / 32.0;
    c.margin_statement = std::max(c.margin_statement, lhs - c.bound_statement);
    c.margin_proof = std::max(c.margin_proof, lhs - c.bound_proof);
  }
  c.statement_holds = c.margin_statement <= 0.0;
  c.proof_holds = c.margin_proof <= 0.0;
  c.flagged = !c.statement_holds && c.proof_holds;
  return c;
}

// ---------------------------------------------------------------------------
// Extrema

namespace {

double component_at(const Trajectory& traj, double y, int component) {
  double buf[2];
  traj.sample_into(y, std::span<double>(buf, 2));
  return buf[component];
}

double bisect(const Trajectory& traj, int component, double a, double b, double fa) {
  for (int it = 0; it < 200 && std::abs(b - a) > 1e-12; ++it) {
    const double mid = 0.5 * (a + b);
    const double fm = component_at(traj, mid, component);
    if (fm == 0.0) return mid;
    if ((fm > 0.0) == (fa > 0.0)) {
      a = mid;
      fa = fm;
    } else {
      b = mid;
    }
  }
  return 0.5 * (a + b);
}

// Roots of one component in the order of travel, including the starting
// node when the component vanishes there.
std::vector<double> roots(const Trajectory& traj, int component) {
  if (traj.dimension() != 1) throw Error(ErrorKind::Domain, "extrema needs a scalar trajectory");
  std::vector<double> out;
  if (traj.size() == 0) return out;
  auto value = [&](std::size_t i) { return traj.state(i)[static_cast<std::size_t>(component)]; };
  if (value(0) == 0.0) out.push_back(traj.node(0));
  for (std::size_t i = 0; i + 1 < traj.size(); ++i) {
    const double fa = value(i), fb = value(i + 1);
    if (fb == 0.0) {
      out.push_back(traj.node(i + 1));
    } else if (fa != 0.0 && (fa > 0.0) != (fb > 0.0)) {
      out.push_back(bisect(traj, component, traj.node(i), traj.node(i + 1), fa));
    }
  }
  return out;
}

bool identically_zero(const Trajectory& traj) {
  for (std::size_t i = 0; i < traj.size(); ++i) {
    if (traj.state(i)[0] != 0.0 || traj.state(i)[1] != 0.0) return false;
  }
  return true;
}

}  // namespace

std::optional<double> first_zero(const Trajectory& traj, int component) {
  if (component != 0 && component != 1) throw Error(ErrorKind::Domain, "component must be 0 or 1");
  if (traj.size() == 0 || identically_zero(traj)) return std::nullopt;
  for (double y : roots(traj, component)) {
    if (y != traj.node(0)) return y;
  }
  return std::nullopt;
}

ExtremaSequence extrema(const Trajectory& traj) {
  ExtremaSequence seq;
  // The zero solution has no extrema.
  if (traj.size() == 0 || identically_zero(traj)) return seq;
  seq.m = roots(traj, 1);
  seq.n = roots(traj, 0);
  // f(start) = 0 is not a maximum of f'^2 in the sense used here.
  if (!seq.n.empty() && seq.n.front() == traj.node(0)) seq.n.erase(seq.n.begin());
  return seq;
}

double PotentialSpec::weighted(double x, double f) const {
  const double f2 = f * f;
  double pw = f2, s = 0.0;
  for (std::size_t k = 0; k < v.size(); ++k) {
    s += v[k](x) * pw / static_cast<double>(k + 1);
    pw *= f2;
  }
  return s;
}

PotentialSpec PotentialSpec::reflected_amplitude() {
  return {{[](double x) { return x * x / 16.0; }, [](double x) { return x / 4.0; },
           [](double) { return 3.0 / 16.0; }}};
}

OscillationReport oscillation_inequalities(const ExtremaSequence& seq, const Trajectory& traj,
                                           const PotentialSpec& pot) {
  OscillationReport rep;
  const auto& m = seq.m;
  const auto& n = seq.n;
  auto before = [&](double a, double b) {
    return traj.direction() == Direction::Forward ? a < b : a > b;
  };
  for (std::size_t j = 1; j < m.size() && j - 1 < n.size(); ++j) {
    if (!(before(m[j - 1], n[j - 1]) && before(n[j - 1], m[j]))) rep.interlaced = false;
  }
  rep.min_margin = std::numeric_limits<double>::infinity();
  double prev_max = std::numeric_limits<double>::infinity(), prev_slope = 0.0;
  for (std::size_t j = 1; j < m.size() && j - 1 < n.size(); ++j) {
    const double mp = m[j - 1], nj = n[j - 1], mj = m[j];
    const double fp = component_at(traj, mp, 0), fj = component_at(traj, mj, 0);
    const double d = component_at(traj, nj, 1);
    const double d2 = d * d;
    if (d2 == 0.0) continue;
    ChainMargins c1{j, (d2 - pot.weighted(nj, fj)) / d2, (pot.weighted(nj, fp) - d2) / d2};
    ChainMargins c2{j, (d2 - pot.weighted(mp, fp)) / d2, (pot.weighted(mj, fj) - d2) / d2};
    rep.first_chain.push_back(c1);
    rep.second_chain.push_back(c2);
    rep.min_margin = std::min({rep.min_margin, c1.lower, c1.upper, c2.lower, c2.upper});
    const double amp = std::abs(fp);
    if (amp > prev_max * (1.0 + 1e-12)) rep.maxima_monotone = false;
    if (d2 < prev_slope * (1.0 - 1e-12)) rep.maxima_monotone = false;
    prev_max = amp;
    prev_slope = d2;
  }
  if (rep.first_chain.empty()) rep.min_margin = 0.0;
  return rep;
}

// ---------------------------------------------------------------------------
// Decay

DecayReport decay_report(const Trajectory& traj) {
  DecayReport r;
  if (traj.size() == 0) return r;
  r.a0 = traj.state(0)[0];
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const double y = traj.node(i);
    const double w = std::pow(1.0 + y * y, 0.25);
    const auto st = traj.state(i);
    r.sup_weighted_a = std::max(r.sup_weighted_a, w * std::abs(st[0]));
    r.sup_weighted_da = std::max(r.sup_weighted_da, std::abs(st[1]) / w);
  }
  if (r.a0 != 0.0) {
    r.c3_a = r.sup_weighted_a / std::abs(r.a0);
    r.c3_da = r.sup_weighted_da / std::abs(r.a0);
  }
  return r;
}

DecayReport decay_report(const Trajectory& pos, const Trajectory& neg) {
  const DecayReport p = decay_report(pos), n = decay_report(neg);
  DecayReport r = p;
  r.sup_weighted_a = std::max(p.sup_weighted_a, n.sup_weighted_a);
  r.sup_weighted_da = std::max(p.sup_weighted_da, n.sup_weighted_da);
  if (r.a0 != 0.0) {
    r.c3_a = r.sup_weighted_a / std::abs(r.a0);
    r.c3_da = r.sup_weighted_da / std::abs(r.a0);
  }
  return r;
}

EnvelopeFit envelope_slope(const Trajectory& traj, double lo, double hi) {
  const auto seq = extrema(traj);
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t count = 0;
  for (double m : seq.m) {
    const double am = std::abs(m);
    if (am < lo || am > hi) continue;
    const double v = std::abs(component_at(traj, m, 0));
    if (v == 0.0) continue;
    const double x = std::log(am), yv = std::log(v);
    sx += x;
    sy += yv;
    sxx += x * x;
    sxy += x * yv;
    ++count;
  }
  if (count < 3) throw Error(ErrorKind::IllConditioned, "fewer than 3 maxima in the window");
  const double nn = static_cast<double>(count);
  EnvelopeFit f;
  f.slope = (nn * sxy - sx * sy) / (nn * sxx - sx * sx);
  f.points = count;
  return f;
}

double weighted_envelope(const Trajectory& traj, double lo, double hi) {
  // Node values alone can sit a quarter radian off a crest, so the maxima
  // are polished first.
  double sup = 0.0;
  for (double m : extrema(traj).m) {
    const double am = std::abs(m);
    if (am < lo || am > hi) continue;
    sup = std::max(sup, std::sqrt(am) * std::abs(component_at(traj, m, 0)));
  }
  return sup;
}

}  // namespace dnls
