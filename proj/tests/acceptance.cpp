// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

#include "dnls/asymptotics.hpp"
#include "dnls/b_path.hpp"
#include "dnls/diagnostics.hpp"
#include "dnls/errors.hpp"
#include "dnls/integrator.hpp"
#include "dnls/linearized.hpp"
#include "dnls/profile_core.hpp"

using namespace dnls;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double harmonic(double, double a, double) { return -a; }

const SolverConfig kCfg;

std::shared_ptr<const Trajectory> amplitude(double a0, OdeSide side, double y_max) {
  return std::make_shared<const Trajectory>(solve_amplitude({a0, 0.0}, side, y_max, kCfg));
}

Outcome linearized_oracle() {
  double res = 0.0, wr = 0.0;
  for (int k = -2000; k <= 2000; ++k) {
    const double y = k * 0.01;
    res = std::max({res, std::abs(linear_residual(g_even_jet(y), y)),
                    std::abs(linear_residual(g_odd_jet(y), y))});
    wr = std::max(wr, std::abs(wronskian(y) - 1.0));
  }
  double dev = 0.0;
  for (double end : {-20.0, 20.0}) {
    const auto e = integrate_scalar(linear_rhs, {1.0, 0.0}, 0.0, end, kCfg);
    const auto o = integrate_scalar(linear_rhs, {0.0, 1.0}, 0.0, end, kCfg);
    for (int k = 0; k <= 20000; ++k) {
      const double y = end * k / 20000.0;
      dev = std::max({dev, std::abs(e.sample(y)[0] - g_even(y)), std::abs(o.sample(y)[0] - g_odd(y))});
    }
  }
  return {res <= 1e-8 && wr <= 1e-8 && dev <= 1e-7,
          fmt("residual %.2e (<= 1e-8), Wronskian error %.2e (<= 1e-8), integrator vs G %.2e (<= 1e-7)",
              res, wr, dev)};
}

Outcome decay_law() {
  double worst = 0.0;
  std::string d;
  for (OdeSide side : {OdeSide::PositiveY, OdeSide::NegativeY}) {
    const auto fit = envelope_slope(*amplitude(0.1, side, 200.0), 20.0, 200.0);
    worst = std::max(worst, std::abs(fit.slope + 0.5));
    d += fmt("%s slope %.5f; ", to_string(side), fit.slope);
  }
  return {worst <= 0.02, d + fmt("max |slope + 0.5| %.2e (<= 0.02)", worst)};
}

struct FitRun {
  double eps;
  OdeSide side;
  AsymptoticFit fit;
  double sqrt_2eb;
};

std::vector<FitRun> fit_runs() {
  std::vector<FitRun> runs;
  for (double eps : {0.05, 0.1, 0.2}) {
    for (OdeSide side : {OdeSide::PositiveY, OdeSide::NegativeY}) {
      const auto path = BPath::from_amplitude(amplitude(eps, side, 200.0), side, 1.0);
      const auto fit = fit_asymptotics(polar_decompose(path), 50.0, 5000.0, side);
      const auto eb = energy_eb(50.0, path, path.eta_max());
      runs.push_back({eps, side, fit, std::sqrt(2.0 * eb.value)});
    }
  }
  return runs;
}

Outcome log_phase(const std::vector<FitRun>& runs) {
  double worst = 0.0, ratio_lo = 1e9, ratio_hi = -1e9;
  bool signs = true;
  for (const auto& r : runs) {
    const double ex = expected_log_coeff(r.side, r.fit.q_limit);
    worst = std::max(worst, std::abs(r.fit.log_coeff - ex) / std::abs(ex));
    const double ratio = r.fit.log_coeff / derived_log_coeff(r.side, r.fit.q_limit);
    ratio_lo = std::min(ratio_lo, ratio);
    ratio_hi = std::max(ratio_hi, ratio);
    signs = signs && (r.side == OdeSide::PositiveY ? r.fit.log_coeff > 0.0 : r.fit.log_coeff < 0.0);
  }
  return {worst <= 0.05 && signs,
          fmt("max relative error vs (3/8)q^2 %.4f (<= 0.05), sign pattern %s, "
              "c_log / ((3/16)q^2) in [%.4f, %.4f]",
              worst, signs ? "ok" : "wrong", ratio_lo, ratio_hi)};
}

Outcome amplitude_limit(const std::vector<FitRun>& runs) {
  double worst = 0.0;
  for (const auto& r : runs) worst = std::max(worst, std::abs(r.fit.q_limit / r.sqrt_2eb - 1.0));
  return {worst <= 0.01, fmt("max |q / sqrt(2 E_B) - 1| %.2e (<= 0.01)", worst)};
}

Outcome monotonicity() {
  const auto refl = integrate_scalar(reflected_rhs, {0.5, 0.0}, 0.0, 100.0, kCfg);
  const auto pos = integrate_scalar(amplitude_rhs, {0.1, 0.0}, 0.0, 200.0, kCfg);
  const auto mr = monotonicity_report(refl, OdeSide::NegativeY);
  const auto mp = monotonicity_report(pos, OdeSide::PositiveY);
  bool ok = mr.first.evaluated > 0 && mp.first.evaluated > 0;
  std::string d = fmt("reflected from n1 = %.4f, positive from %.4f; ", mr.y_from, mp.y_from);
  for (const auto* c : {&mr.first, &mr.second, &mp.first, &mp.second}) {
    ok = ok && c->holds(1e-9);
    d += fmt("%s: %.2e; ", c->name, c->max_relative_violation);
  }
  return {ok, d + "tolerance 1e-9 relative"};
}

Outcome oscillation() {
  const auto refl = integrate_scalar(reflected_rhs, {0.5, 0.0}, 0.0, 100.0, kCfg);
  const auto seq = extrema(refl);
  const auto rep = oscillation_inequalities(seq, refl, PotentialSpec::reflected_amplitude());
  const auto h = integrate_scalar(harmonic, {1.0, 0.0}, 0.0, 60.0, kCfg);
  const PotentialSpec one{{[](double) { return 1.0; }}};
  const auto hrep = oscillation_inequalities(extrema(h), h, one);
  double dev = 0.0;
  for (const auto* chain : {&hrep.first_chain, &hrep.second_chain}) {
    for (const auto& c : *chain) dev = std::max({dev, std::abs(c.lower), std::abs(c.upper)});
  }
  const bool ok = rep.interlaced && rep.min_margin >= -1e-9 && !rep.first_chain.empty() &&
                  !hrep.first_chain.empty() && dev <= 1e-9;
  return {ok, fmt("%zu maxima, %zu zeros, interlaced %s, min margin %.2e (>= -1e-9), "
                  "harmonic deviation %.2e over %zu chains (<= 1e-9)",
                  seq.m.size(), seq.n.size(), rep.interlaced ? "yes" : "no", rep.min_margin, dev,
                  hrep.first_chain.size())};
}

Outcome local_solvers() {
  double worst = 0.0;
  for (double a0 : {0.1, 0.5}) {
    for (double a1 : {0.0, 0.1}) {
      const auto ts = taylor_series({a0, a1}, 20);
      const auto pc = picard_iterate({a0, a1}, 0.25, 8);
      const auto fw = integrate_scalar(amplitude_rhs, {a0, a1}, 0.0, 0.25, kCfg);
      const auto bw = integrate_scalar(amplitude_rhs, {a0, a1}, 0.0, -0.25, kCfg);
      for (int k = -250; k <= 250; ++k) {
        const double y = k / 1000.0;
        const double a = (y >= 0.0 ? fw.sample(y) : bw.sample(y))[0];
        worst = std::max({worst, std::abs(ts(y) - a), std::abs(pc.approx(y) - a)});
      }
    }
  }
  return {worst <= 1e-8, fmt("sup difference %.2e (<= 1e-8)", worst)};
}

Outcome representation() {
  const auto pr = Profile::solve({0.1, 0.0}, 30.0, kCfg);
  const double res = profile_residual_sup(pr, 0.0, 30.0);
  const auto direct = integrate_complex_profile({0.1, 0.0}, {0.0, 0.1 * (-0.75 * 0.01)}, 0.0, 30.0, kCfg);
  const double mm = complex_polar_mismatch(pr, direct);
  return {res <= 1e-6 && mm <= 1e-6,
          fmt("profile residual %.2e (<= 1e-6), direct complex mismatch %.2e (<= 1e-6)", res, mm)};
}

Outcome pde() {
  std::vector<double> ts, xs;
  for (int k = 0; k <= 30; ++k) ts.push_back(1.0 + 0.1 * k);
  for (int k = 0; k <= 400; ++k) xs.push_back(-10.0 + 0.05 * k + 1e-3);
  xs.back() = 10.0;
  SolverConfig tight = kCfg;
  tight.rel_tol /= 10.0;
  tight.abs_tol /= 10.0;
  const auto r1 = pde_residual(Profile::solve({0.1, 0.0}, 11.0, kCfg), ts, xs);
  const auto r2 = pde_residual(Profile::solve({0.1, 0.0}, 11.0, tight), ts, xs);
  const double ratio = r1.sup / r2.sup;
  return {r1.sup <= 1e-6 && ratio >= 5.0,
          fmt("residual %.2e (<= 1e-6) at t = %.2f, x = %.3f; tightened %.2e, ratio %.2f (>= 5)",
              r1.sup, r1.t_at, r1.x_at, r2.sup, ratio)};
}

Outcome secular() {
  const double ws[] = {25.0, 50.0, 100.0, 200.0};
  bool ok = true;
  std::string d;
  for (double om : {0.0, std::numbers::pi / 4, std::numbers::pi / 2}) {
    const auto rep = duhamel_secular(om, 400.0, ws);
    double gmin = 1e9;
    for (double g : rep.growth) gmin = std::min(gmin, g);
    const double s = rep.windows.back().slope / 0.375;
    ok = ok && gmin >= 1.8 && std::abs(s - 1.0) <= 0.02;
    d += fmt("omega_B %.3f: min growth %.3f, slope/(3/8) %.4f; ", om, gmin, s);
  }
  return {ok, d + "growth >= 1.8, slope within 2%"};
}

Outcome blowup() {
  const auto big = detect_blowup({2.0, 0.0}, OdeSide::PositiveY, kCfg, 1000.0);
  const auto small = detect_blowup({0.05, 0.0}, OdeSide::PositiveY, kCfg, 200.0);
  return {big.triggered && !small.triggered,
          fmt("A0 = 2.0: triggered %s, %s at y = %.1f, weighted peak %.1f; A0 = 0.05: triggered %s",
              big.triggered ? "yes" : "no", to_string(big.termination), big.y_reached,
              big.weighted_peak, small.triggered ? "yes" : "no")};
}

}  // namespace

int main() {
  const auto t0 = std::chrono::steady_clock::now();
  std::vector<std::pair<std::string, std::function<Outcome()>>> criteria;
  std::vector<FitRun> runs;
  auto runs_once = [&]() -> const std::vector<FitRun>& {
    if (runs.empty()) runs = fit_runs();
    return runs;
  };
  criteria.emplace_back("linearized oracle", linearized_oracle);
  criteria.emplace_back("decay law", decay_law);
  criteria.emplace_back("logarithmic phase correction", [&] { return log_phase(runs_once()); });
  criteria.emplace_back("amplitude limit consistency", [&] { return amplitude_limit(runs_once()); });
  criteria.emplace_back("energy monotonicity", monotonicity);
  criteria.emplace_back("extrema and oscillation inequalities", oscillation);
  criteria.emplace_back("local solver equivalence", local_solvers);
  criteria.emplace_back("representation closure", representation);
  criteria.emplace_back("PDE residual", pde);
  criteria.emplace_back("secular growth", secular);
  criteria.emplace_back("blowup regression", blowup);

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const Error& e) {
      o = {false, std::string("error (") + std::string(to_string(e.kind())) + "): " + e.what()};
    }
    std::printf("criterion %2zu %s  %s: %s\n", i + 1, o.pass ? "PASS" : "FAIL",
                criteria[i].first.c_str(), o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failures;
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("%d of %zu criteria failed (%.1f s)\n", failures, criteria.size(), secs);
  return failures == 0 ? 0 : 1;
}
