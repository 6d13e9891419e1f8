#include <doctest.h>

#include <cmath>
#include <memory>
#include <numbers>

#include "dnls/asymptotics.hpp"
#include "dnls/b_path.hpp"
#include "dnls/diagnostics.hpp"
#include "dnls/errors.hpp"
#include "dnls/linearized.hpp"

using namespace dnls;

namespace {

std::shared_ptr<const Trajectory> amplitude(double a0, OdeSide side, double y_max,
                                            const SolverConfig& cfg = {}) {
  return std::make_shared<const Trajectory>(solve_amplitude({a0, 0.0}, side, y_max, cfg));
}

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error thrown");
  return ErrorKind::Config;
}

}  // namespace

TEST_CASE("B-path from the amplitude") {
  const auto zero = BPath::from_amplitude(amplitude(0.0, OdeSide::PositiveY, 50.0),
                                          OdeSide::PositiveY, 1.0);
  for (const auto& p : zero.nodes()) CHECK(p.b == 0.0);

  for (OdeSide side : {OdeSide::PositiveY, OdeSide::NegativeY}) {
    const auto t = amplitude(0.1, side, 200.0);
    const auto path = BPath::from_amplitude(t, side, 1.0);
    CHECK(path.sign() == cubic_sign_for(side));
    // |y|^{-1/2} B(y^2/8) recovers A at the nodes
    double worst = 0.0;
    for (std::size_t i = 0; i < path.size(); i += 13) {
      const double s = std::sqrt(8.0 * path[i].eta);
      const double y = side == OdeSide::PositiveY ? s : -s;
      worst = std::max(worst, std::abs(path[i].b / std::sqrt(s) - t->sample(y)[0]));
    }
    CHECK(worst < 1e-12);
    CHECK(path.residual_sup(1.0, 5000.0) <= 1e-6);
    // interpolated points satisfy the B-equation to the dense-output accuracy
    double res = 0.0;
    for (double eta = 1.3; eta < 5000.0; eta *= 1.37) {
      const auto p = path.at(eta);
      res = std::max(res, std::abs(p.ddb - b_rhs(eta, p.b, p.db, path.sign())));
    }
    CHECK(res <= 1e-6);
  }
  CHECK(kind_of([] {
          BPath::from_amplitude(amplitude(0.1, OdeSide::PositiveY, 0.5), OdeSide::PositiveY, 1.0);
        }) == ErrorKind::Span);
}

TEST_CASE("polar decomposition") {
  const double etas[] = {1.0, 1.1};
  {
    const double b[] = {1.0, std::cos(-0.1)}, db[] = {0.0, std::sin(-0.1)};
    const auto p = polar_decompose(etas, b, db);
    CHECK(p.r[0] == doctest::Approx(1.0));
    CHECK(p.omega[0] == doctest::Approx(0.0));
  }
  {
    const double b[] = {0.0, 0.0}, db[] = {-1.0, -1.0};
    const auto p = polar_decompose(etas, b, db);
    CHECK(p.r[0] == doctest::Approx(1.0));
    CHECK(p.omega[0] == doctest::Approx(-std::numbers::pi / 2));
  }
  {
    const double b[] = {1e-12, 0.0}, db[] = {0.0, 1e-12};
    CHECK(kind_of([&] { polar_decompose(etas, b, db); }) == ErrorKind::Degenerate);
  }
  // unwrapped phase follows omega' close to -1 along a path
  const auto path = BPath::from_amplitude(amplitude(0.1, OdeSide::PositiveY, 100.0),
                                          OdeSide::PositiveY, 1.0);
  const auto pol = polar_decompose(path);
  for (std::size_t i = 1; i < pol.omega.size(); i += 11) {
    CHECK(std::abs(pol.omega[i] - pol.omega[i - 1]) < std::numbers::pi / 2);
    CHECK(polar_b(pol, i) == doctest::Approx(path[i].b).scale(1.0).epsilon(1e-13));
    CHECK(polar_db(pol, i) == doctest::Approx(path[i].db).scale(1.0).epsilon(1e-13));
  }
}

TEST_CASE("R^2 - 2 E_B decays like 1/eta") {
  for (OdeSide side : {OdeSide::PositiveY, OdeSide::NegativeY}) {
    const auto path = BPath::from_amplitude(amplitude(0.1, side, 200.0), side, 1.0);
    const auto pol = polar_decompose(path);
    const auto eb = energy_eb_profile(path, path.eta_max());
    REQUIRE(eb.size() == path.size());
    std::vector<double> cs;
    for (double e0 : {20.0, 80.0, 320.0, 1280.0}) {
      double c = 0.0;
      for (std::size_t i = 0; i < eb.size(); ++i) {
        const double e = path[i].eta;
        if (e >= e0 && e <= 2.0 * e0) c = std::max(c, e * std::abs(pol.r[i] * pol.r[i] - 2.0 * eb[i].value));
      }
      cs.push_back(c);
    }
    for (double c : cs) CHECK(c <= 3.0 * cs.front());
  }
}

TEST_CASE("phase equation residual") {
  // linear problem: omega' = -1 - (3/16) cos^2(omega) / eta^2
  const auto lt = std::make_shared<const Trajectory>(
      integrate_scalar(linear_rhs, {0.1, 0.0}, 0.0, 200.0, SolverConfig{}));
  const auto lp = BPath::from_amplitude(lt, OdeSide::PositiveY, 1.0);
  const auto lpol = polar_decompose(lp);
  for (double e0 : {10.0, 100.0, 1000.0}) {
    double c = 0.0;
    for (std::size_t i = 0; i < lp.size(); ++i) {
      const double e = lp[i].eta;
      if (e >= e0 && e <= 2.0 * e0) c = std::max(c, e * e * std::abs(lpol.domega[i] + 1.0));
    }
    CHECK(c <= 3.0 / 16.0 + 1e-6);
    CHECK(c > 0.18);
  }

  for (OdeSide side : {OdeSide::PositiveY, OdeSide::NegativeY}) {
    const auto path = BPath::from_amplitude(amplitude(0.1, side, 200.0), side, 1.0);
    const auto pol = polar_decompose(path);
    const auto fit = fit_asymptotics(pol, 50.0, 5000.0, side);
    const double c = phase_correction_coeff(path.sign());
    CHECK(c == (side == OdeSide::PositiveY ? 0.5 : -0.5));
    const auto ok = phase_ode_residual(pol, fit.q_limit, c, 10.0, 5000.0);
    const auto bad = phase_ode_residual(pol, fit.q_limit, -c, 10.0, 5000.0);
    CHECK(std::isfinite(ok.constant));
    CHECK(ok.constant < 0.1);
    CHECK(ok.constant_outer < ok.constant);
    // the wrong sign leaves a q^2/eta term whose weighted residual grows outward
    CHECK(bad.constant > 10.0 * ok.constant);
    CHECK(bad.constant_outer > 50.0 * ok.constant_outer);
  }
}

TEST_CASE("logarithmic phase fit") {
  for (double eps : {0.05, 0.1, 0.2}) {
    double coeff[2];
    for (OdeSide side : {OdeSide::PositiveY, OdeSide::NegativeY}) {
      const auto path = BPath::from_amplitude(amplitude(eps, side, 200.0), side, 1.0);
      const auto pol = polar_decompose(path);
      const auto fit = fit_asymptotics(pol, 50.0, 5000.0, side);
      coeff[side == OdeSide::PositiveY ? 0 : 1] = fit.log_coeff;
      // resonant average of cos^4 gives (3/16) q^2
      const double derived = derived_log_coeff(side, fit.q_limit);
      CHECK(std::abs(fit.log_coeff - derived) <= 0.05 * std::abs(derived));
      CHECK(expected_log_coeff(side, fit.q_limit) == doctest::Approx(2.0 * derived));
      // amplitude limit from R against the conserved energy
      const auto eb = energy_eb(50.0, path, path.eta_max());
      CHECK(std::abs(fit.q_limit / std::sqrt(2.0 * eb.value) - 1.0) <= 0.01);
      CHECK(fit.residual_outer < fit.residual_inner);
      CHECK(fit.inv_coeff == doctest::Approx(3.0 / 32.0).epsilon(0.05));
    }
    CHECK(coeff[1] < 0.0);
    CHECK(coeff[0] > 0.0);
  }
}

TEST_CASE("fit rejections") {
  const auto path = BPath::from_amplitude(amplitude(0.1, OdeSide::PositiveY, 200.0),
                                          OdeSide::PositiveY, 1.0);
  const auto pol = polar_decompose(path);
  CHECK(kind_of([&] { fit_asymptotics(pol, 5.0, 5000.0, OdeSide::PositiveY); }) == ErrorKind::Domain);
  CHECK(kind_of([&] { fit_asymptotics(pol, 50.0, 400.0, OdeSide::PositiveY); }) ==
        ErrorKind::IllConditioned);
  CHECK(kind_of([&] { fit_asymptotics(pol, 50.0, 9000.0, OdeSide::PositiveY); }) == ErrorKind::Span);
  const auto zero = BPath::from_amplitude(amplitude(0.0, OdeSide::PositiveY, 200.0),
                                          OdeSide::PositiveY, 1.0);
  CHECK(kind_of([&] { polar_decompose(zero); }) == ErrorKind::Degenerate);
}

TEST_CASE("oscillatory tails converge") {
  // oracle: Ci(2000) - Ci(2) from mpmath
  const auto cosine = tail_convergence([](double z) { return std::cos(2.0 * z) / z; }, 1.0, 1000.0);
  CHECK(cosine.total == doctest::Approx(-0.422515717390416627).epsilon(1e-11));
  CHECK(cosine.constant < 1.0);
  // the non-oscillatory comparison diverges logarithmically
  const auto plain = tail_convergence([](double z) { return 1.0 / z; }, 1.0, 1000.0);
  CHECK(plain.total == doctest::Approx(std::log(1000.0)).epsilon(1e-12));
  CHECK(plain.constant > 100.0 * cosine.constant);

  for (OdeSide side : {OdeSide::PositiveY, OdeSide::NegativeY}) {
    const auto path = BPath::from_amplitude(amplitude(0.1, side, 200.0), side, 1.0);
    const auto rep = oscillatory_tail_decay(path, 10.0, 5000.0);
    CHECK(rep.assumption_held);
    CHECK(rep.eta_valid == 5000.0);
    CHECK(std::isfinite(rep.c_cos2));
    CHECK(std::isfinite(rep.c_cos4));
    CHECK(rep.c_cos2 < 5.0);
    CHECK(rep.c_cos4 < 5.0);
  }
}

TEST_CASE("cross-representation closure") {
  // amplitude -> B -> polar -> B = R cos(omega) against the B-equation itself
  for (OdeSide side : {OdeSide::PositiveY, OdeSide::NegativeY}) {
    const auto path = BPath::from_amplitude(amplitude(0.1, side, 90.0), side, 1.0);
    const auto pol = polar_decompose(path);
    const CubicSign sign = path.sign();
    const SecondOrderRhs rhs = [sign](double eta, std::span<const double> x,
                                      std::span<const double> dx, std::span<double> ddx) {
      ddx[0] = b_rhs(eta, x[0], dx[0], sign);
    };
    const auto start = path.at(1.0);
    const double x0[1] = {start.b}, dx0[1] = {start.db};
    const auto direct = integrate(rhs, x0, dx0, 1.0, 1000.0, SolverConfig{});
    double dev = 0.0;
    for (std::size_t i = 0; i < path.size(); ++i) {
      if (path[i].eta < 1.0 || path[i].eta > 1000.0) continue;
      dev = std::max(dev, std::abs(direct.sample(path[i].eta)[0] - polar_b(pol, i)));
    }
    CHECK(dev <= 1e-6);
  }
}

TEST_CASE("phase integral") {
  const SolverConfig cfg;
  const auto zero = amplitude(0.0, OdeSide::PositiveY, 50.0);
  const auto zp = phase_integral(zero, 0.3);
  for (std::size_t i = 0; i < zp.ys.size(); i += 17) {
    CHECK(zp.phi[i] == doctest::Approx(0.3 + zp.ys[i] * zp.ys[i] / 8.0).epsilon(1e-14));
  }

  const auto pr = Profile::solve({0.4, 0.0}, 60.0, cfg);
  const double h = 1e-4;
  const double dphi = (phase_at(pr.phase(OdeSide::PositiveY), h) -
                       phase_at(pr.phase(OdeSide::NegativeY), -h)) / (2.0 * h);
  CHECK(std::abs(dphi + 0.75 * 0.16) < 1e-10);
  CHECK(std::abs(pr.jet(0.0).phi - 0.0) < 1e-15);

  const auto fine = phase_integral(pr.positive_ptr(), 0.0, 2);
  CHECK(std::abs(phase_at(fine, 50.0) - phase_at(pr.phase(OdeSide::PositiveY), 50.0)) < 1e-9);
  CHECK(kind_of([&] { phase_at(fine, 61.0); }) == ErrorKind::Span);
}

TEST_CASE("complex profile") {
  const SolverConfig cfg;
  const auto zero = Profile::solve({0.0, 0.0}, 30.0, cfg);
  for (const auto& s : reconstruct_q(zero)) CHECK(std::abs(s.q) == 0.0);
  CHECK(profile_residual_sup(zero, -30.0, 30.0) == 0.0);

  const auto pr = Profile::solve({0.1, 0.0}, 30.0, cfg);
  const auto qs = reconstruct_q(pr);
  for (std::size_t i = 1; i < qs.size(); ++i) CHECK(qs[i - 1].y < qs[i].y);
  for (std::size_t i = 0; i < pr.positive().size(); i += 5) {
    const double y = pr.positive().node(i);
    CHECK(std::abs(pr.jet(y).q) == doctest::Approx(std::abs(pr.positive().state(i)[0])).epsilon(1e-14));
  }
  CHECK(profile_residual_sup(pr, 0.0, 30.0) <= 1e-6);
  CHECK(profile_residual_sup(pr, -30.0, 0.0) <= 1e-6);

  // Q(0) = A0, Q'(0) = i A0 phi'(0) with phi'(0) = -(3/4) A0^2
  const std::complex<double> q0(0.1, 0.0), dq0(0.0, 0.1 * (-0.75 * 0.01));
  const auto direct = integrate_complex_profile(q0, dq0, 0.0, 30.0, cfg);
  CHECK(complex_polar_mismatch(pr, direct) <= 1e-6);
}

TEST_CASE("PDE residual") {
  std::vector<double> ts, xs;
  for (int k = 0; k <= 30; ++k) ts.push_back(1.0 + 0.1 * k);
  for (int k = 0; k <= 400; ++k) xs.push_back(-10.0 + 0.05 * k + 1e-3);
  xs.back() = 10.0;

  const auto zero = Profile::solve({0.0, 0.0}, 11.0, SolverConfig{});
  CHECK(pde_residual(zero, ts, xs).sup == 0.0);

  SolverConfig loose, tight;
  tight.rel_tol = loose.rel_tol / 10.0;
  tight.abs_tol = loose.abs_tol / 10.0;
  const auto r1 = pde_residual(Profile::solve({0.1, 0.0}, 11.0, loose), ts, xs);
  const auto r2 = pde_residual(Profile::solve({0.1, 0.0}, 11.0, tight), ts, xs);
  CHECK(r1.sup <= 1e-6);
  CHECK(r1.sup >= 5.0 * r2.sup);

  const double early[] = {0.5};
  CHECK(kind_of([&] { pde_residual(zero, early, xs); }) == ErrorKind::Domain);
  const double far[] = {50.0};
  CHECK(kind_of([&] { pde_residual(zero, ts, far); }) == ErrorKind::Span);
}

TEST_CASE("Duhamel integral") {
  CHECK(duhamel_integral(0.3, 0.0) == 0.0);
  // sin^3 s = (3 sin s - sin 3s)/4 integrates in closed form
  for (double eta : {0.7, 3.0, 10.0, 40.0, 123.4}) {
    const double exact = 0.375 * (std::sin(eta) - eta * std::cos(eta)) -
                         (3.0 * std::sin(eta) - std::sin(3.0 * eta)) / 32.0;
    CHECK(duhamel_integral(0.0, eta) == doctest::Approx(exact).epsilon(1e-10).scale(1.0));
  }
  const double ws[] = {25.0, 50.0, 100.0, 200.0};
  for (double om : {0.0, std::numbers::pi / 4, std::numbers::pi / 2}) {
    const auto rep = duhamel_secular(om, 400.0, ws);
    REQUIRE(rep.windows.size() == 4);
    for (double g : rep.growth) CHECK(g >= 1.8);
    CHECK(std::abs(rep.windows[2].slope / 0.375 - 1.0) <= 0.02);
    CHECK(std::abs(rep.windows[3].slope / 0.375 - 1.0) <= 0.02);
  }
  CHECK(kind_of([&] { duhamel_secular(0.0, 300.0, ws); }) == ErrorKind::Domain);
}
