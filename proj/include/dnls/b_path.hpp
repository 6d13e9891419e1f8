#pragma once

// Unit-frequency variable B(η) = |y|^{1/2} Ã(|y|), η = y^2/8, built from an
// amplitude trajectory or integrated directly in η.

#include <memory>
#include <vector>

#include "dnls/integrator.hpp"
#include "dnls/profile_core.hpp"

namespace dnls {

struct BPoint {
  double eta = 0.0;
  double b = 0.0;
  double db = 0.0;   // dB/dη
  double ddb = 0.0;  // d²B/dη²
};

/// Chain rule from (s, Ã, Ã', Ã'') with s = |y| > 0 to (η, B, B', B'').
BPoint to_b_point(double s, double a, double da, double dda);

class BPath {
 public:
  /// `amp` solves the amplitude equation from y = 0 towards +Y (PositiveY) or
  /// -Y (NegativeY). Nodes with |y| >= y_min are kept. B'' at nodes uses the
  /// stored A'' so it is independent of which equation `amp` solves.
  /// Throws Error(Domain) for y_min <= 0 and Error(Span) if `amp` does not
  /// reach past y_min on the requested side.
  static BPath from_amplitude(std::shared_ptr<const Trajectory> amp, OdeSide side,
                              double y_min = 1.0);

  /// `btraj` is a forward trajectory of the B-equation in η.
  static BPath from_direct(std::shared_ptr<const Trajectory> btraj, CubicSign sign);

  CubicSign sign() const { return sign_; }
  std::size_t size() const { return nodes_.size(); }
  const BPoint& operator[](std::size_t i) const { return nodes_[i]; }
  const std::vector<BPoint>& nodes() const { return nodes_; }
  double eta_min() const { return nodes_.front().eta; }
  double eta_max() const { return nodes_.back().eta; }

  /// Interpolated point; B'' from the dense-output derivative.
  /// Throws Error(Span) outside [eta_min, eta_max].
  BPoint at(double eta) const;

  /// sup over nodes in [lo, hi] of |B'' - b_rhs(η, B, B', sign)|.
  double residual_sup(double lo, double hi) const;

 private:
  std::shared_ptr<const Trajectory> source_;
  bool direct_ = false;
  OdeSide side_ = OdeSide::PositiveY;
  CubicSign sign_ = CubicSign::PlusCubic;
  std::vector<BPoint> nodes_;
};

}  // namespace dnls
