#pragma once

// Adaptive Dormand–Prince 5(4) integration of second-order real systems
// x'' = f(y, x, x') with dense output.
//
// A system of m second-order equations is carried as a first-order state of
// length 2m laid out as [x_0 .. x_{m-1}, x'_0 .. x'_{m-1}].

#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "dnls/profile_core.hpp"

namespace dnls {

struct SolverConfig {
  double rel_tol = 1e-10;
  double abs_tol = 1e-12;
  /// Step cap scale c: |h| <= c / (1 + |y|) so that the y-linear oscillation
  /// frequency of the profile equations is never aliased.
  double max_step = 1.0;
  /// Integration stops with Termination::Blowup once max|state| exceeds this.
  double blowup_threshold = 1e6;
  /// Integration stops with Termination::StepCollapse below this step size.
  double min_step = 1e-12;
  std::size_t max_samples = 20'000'000;

  /// Throws Error(Config) if a field violates its invariant.
  void validate() const;

  bool operator==(const SolverConfig&) const = default;
};

enum class Direction { Forward, Backward };
enum class Termination { ReachedEnd, Blowup, StepCollapse };

const char* to_string(Termination t);

using SecondOrderRhs = std::function<void(double y, std::span<const double> x,
                                          std::span<const double> dx, std::span<double> ddx)>;

/// Scalar equation a'' = f(y, a, a').
using ScalarRhs = double (*)(double y, double a, double da);

/// Densely sampled solution. Immutable once built by integrate().
class Trajectory {
 public:
  /// Number of second-order components m (the state has 2m entries).
  std::size_t dimension() const { return dim_; }
  std::size_t state_size() const { return 2 * dim_; }
  std::size_t size() const { return ys_.size(); }

  std::span<const double> nodes() const { return ys_; }
  double node(std::size_t i) const { return ys_[i]; }
  std::span<const double> state(std::size_t i) const;
  /// d(state)/dy at node i, i.e. [x', x''] from the right-hand side.
  std::span<const double> derivative(std::size_t i) const;

  Direction direction() const { return direction_; }
  Termination termination() const { return termination_; }
  /// y at which integration stopped (the last node).
  double y_reached() const { return ys_.back(); }
  double y_start() const { return ys_.front(); }
  double peak_magnitude() const { return peak_; }

  bool covers(double y) const;

  /// Interpolated state at y. Exact stored value at nodes.
  /// Throws Error(Span) outside the covered span.
  std::vector<double> sample(double y) const;
  void sample_into(double y, std::span<double> out) const;

  /// Derivative of the dense-output interpolant at y (not the right-hand side
  /// evaluated at the interpolated state).
  std::vector<double> sample_derivative(double y) const;

  /// Index i of the step [node(i), node(i+1)] containing y.
  std::size_t locate(double y) const;

 private:
  friend Trajectory integrate(const SecondOrderRhs&, std::span<const double>,
                              std::span<const double>, double, double, const SolverConfig&);

  std::size_t dim_ = 0;
  Direction direction_ = Direction::Forward;
  Termination termination_ = Termination::ReachedEnd;
  double peak_ = 0.0;
  std::vector<double> ys_;
  std::vector<double> states_;  // size() * 2m
  std::vector<double> derivs_;  // size() * 2m
  std::vector<double> dense_;   // (size()-1) * 5 * 2m
};

/// Integrates x'' = rhs(y, x, x') from y_start to y_end (either direction).
/// Throws Error(Domain) for a degenerate span or mismatched initial data and
/// Error(SampleLimit) if more than config.max_samples nodes would be stored.
Trajectory integrate(const SecondOrderRhs& rhs, std::span<const double> x0,
                     std::span<const double> dx0, double y_start, double y_end,
                     const SolverConfig& config);

Trajectory integrate_scalar(ScalarRhs rhs, const InitialData& init, double y_start,
                            double y_end, const SolverConfig& config);

/// Fixed-step Dormand–Prince 5 (no error control); returns the final state.
/// Used to measure the convergence order.
std::vector<double> integrate_fixed(const SecondOrderRhs& rhs, std::span<const double> x0,
                                    std::span<const double> dx0, double y_start, double y_end,
                                    int steps);

struct BlowupReport {
  bool triggered = false;
  double location = std::numeric_limits<double>::quiet_NaN();
  /// Largest max|state| seen; >= blowup_threshold when triggered.
  double peak_magnitude = 0.0;
  /// sup of <y>^{1/2} |A| over the integrated span.
  double weighted_peak = 0.0;
  Termination termination = Termination::ReachedEnd;
  double y_reached = 0.0;
};

/// Integrates the amplitude equation on [0, y_max] (PositiveY) or its
/// reflection on [0, y_max] (NegativeY) and reports the blowup event.
BlowupReport detect_blowup(const InitialData& init, OdeSide side, const SolverConfig& config,
                           double y_max);

/// Amplitude trajectory on one side: Eq. for A on [0, y_max] (PositiveY) or
/// [0, -y_max] (NegativeY, integrated backward).
Trajectory solve_amplitude(const InitialData& init, OdeSide side, double y_max,
                           const SolverConfig& config);

}  // namespace dnls
