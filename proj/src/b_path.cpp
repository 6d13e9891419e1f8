#include "dnls/b_path.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dnls/errors.hpp"

namespace dnls {

BPoint to_b_point(double s, double a, double da, double dda) {
  const double rs = std::sqrt(s);
  BPoint p;
  p.eta = s * s / 8.0;
  p.b = rs * a;
  p.db = 2.0 * a / (s * rs) + 4.0 * da / rs;
  p.ddb = -12.0 * a / (s * s * s * rs) + 16.0 * dda / (s * rs);
  return p;
}

BPath BPath::from_amplitude(std::shared_ptr<const Trajectory> amp, OdeSide side, double y_min) {
  if (!(y_min > 0.0)) throw Error(ErrorKind::Domain, "y_min must be positive");
  const double sgn = side == OdeSide::PositiveY ? 1.0 : -1.0;
  BPath path;
  path.side_ = side;
  path.sign_ = cubic_sign_for(side);
  for (std::size_t i = 0; i < amp->size(); ++i) {
    const double y = amp->node(i);
    const double s = sgn * y;
    if (s < y_min) continue;
    const auto st = amp->state(i);
    const auto d = amp->derivative(i);
    // Ã(s) = A(sgn s): Ã' = sgn A', Ã'' = A''.
    path.nodes_.push_back(to_b_point(s, st[0], sgn * st[1], d[1]));
  }
  if (path.nodes_.size() < 2) {
    throw Error(ErrorKind::Span, "amplitude trajectory does not extend past |y| = " +
                                     std::to_string(y_min) + " on the " + to_string(side) +
                                     " side");
  }
  path.source_ = std::move(amp);
  return path;
}

BPath BPath::from_direct(std::shared_ptr<const Trajectory> btraj, CubicSign sign) {
  if (btraj->direction() != Direction::Forward || btraj->size() < 2) {
    throw Error(ErrorKind::Domain, "direct B trajectory must run forward in eta");
  }
  BPath path;
  path.direct_ = true;
  path.sign_ = sign;
  for (std::size_t i = 0; i < btraj->size(); ++i) {
    const auto st = btraj->state(i);
    const auto d = btraj->derivative(i);
    path.nodes_.push_back({btraj->node(i), st[0], st[1], d[1]});
  }
  path.source_ = std::move(btraj);
  return path;
}

BPoint BPath::at(double eta) const {
  if (!(eta >= eta_min() && eta <= eta_max())) {
    throw Error(ErrorKind::Span, "eta = " + std::to_string(eta) + " outside B path");
  }
  if (direct_) {
    const auto st = source_->sample(eta);
    const auto d = source_->sample_derivative(eta);
    return {eta, st[0], st[1], d[1]};
  }
  const double sgn = side_ == OdeSide::PositiveY ? 1.0 : -1.0;
  const double s = std::sqrt(8.0 * eta);
  const auto st = source_->sample(sgn * s);
  const auto d = source_->sample_derivative(sgn * s);
  BPoint p = to_b_point(s, st[0], sgn * st[1], d[1]);
  p.eta = eta;
  return p;
}

double BPath::residual_sup(double lo, double hi) const {
  double worst = 0.0;
  for (const auto& p : nodes_) {
    if (p.eta < lo || p.eta > hi) continue;
    worst = std::max(worst, std::abs(p.ddb - b_rhs(p.eta, p.b, p.db, sign_)));
  }
  return worst;
}

}  // namespace dnls
