#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "taf/evolution.hpp"
#include "taf/spectral.hpp"
#include "testutil.hpp"

using namespace taf;
using namespace taf::testutil;

namespace {

const double kInf = std::numeric_limits<double>::infinity();
const TorusGrid kGrid = TorusGrid::upsilon(16, 16, 16);

ModelState smooth_state(const TorusGrid& g = kGrid, double rho_mean = 0.5,
                        double rho_amp = 0.2, double theta_amp = 0.02) {
  RealField f = sample_scalar(g, [&](double x, double y, double th) {
    return (rho_mean + rho_amp * std::cos(x)) / kTwoPi +
           theta_amp * std::cos(th) * std::cos(y);
  });
  return ModelState(std::move(f));
}

double rel_l2(const RealField& a, const RealField& b) { return rel_l2_diff(a, b); }

RealField subtract(const RealField& a, const RealField& b) {
  RealField d = a;
  for (std::size_t i = 0; i < d.data.size(); ++i) d.data[i] -= b.data[i];
  return d;
}

}  // namespace

TEST_CASE("constant state has zero right-hand side in both forms") {
  ModelState s(constant_field(kGrid, 0.05));
  CHECK(lq_norm(rhs_f(s, Form::divergence), kInf) <= 1e-13);
  CHECK(lq_norm(rhs_f(s, Form::nondivergence), kInf) <= 1e-13);
  CHECK(lq_norm(rhs_rho(s.moments()), kInf) <= 1e-13);
  CHECK(lq_norm(rhs_p(s), kInf) <= 1e-13);
  for (int n : {0, 1, 2}) CHECK(lq_norm(rhs_tensor(s, n), kInf) <= 1e-12);
}

TEST_CASE("theta-independent state: diffusion reduces to the analytic flux") {
  // f = c (1 + eps cos x): rho = 2 pi f, the diffusive flux
  // (1-rho) grad f + f grad rho collapses to grad f, and the diffusion part
  // of the right-hand side is exactly -c eps cos x. Drift is disabled here;
  // it is exercised through the moment-commutation identities instead.
  const double c = 0.05, eps = 0.3;
  RealField f = sample_scalar(kGrid, [&](double x, double, double) {
    return c * (1.0 + eps * std::cos(x));
  });
  ModelState s(std::move(f));

  TermToggles no_drift;
  no_drift.drift = false;
  RealField expected = sample_scalar(kGrid, [&](double x, double, double) {
    return -c * eps * std::cos(x);
  });

  for (Form form : {Form::divergence, Form::nondivergence})
    CHECK(max_abs_diff(rhs_f(s, form, no_drift), expected) <= 1e-8);

  // Density equation: p = 0, so the right-hand side is Lap rho.
  RealField rr = rhs_rho(s.moments());
  RealField rr_expected(rr.grid, 0);
  for (int j = 0; j < rr.grid.n[1]; ++j)
    for (int i = 0; i < rr.grid.n[0]; ++i)
      rr_expected.data[rr.grid.index(i, j)] =
          -kTwoPi * c * eps * std::cos(rr.grid.coord(0, i));
  CHECK(max_abs_diff(rr, rr_expected) <= 1e-8);
}

TEST_CASE("divergence and non-divergence forms agree on band-limited states") {
  for (std::uint64_t seed : {11, 12, 13, 14}) {
    ModelState s(dealias(random_positive_state(kGrid, 4, seed)));
    CHECK(rel_l2(rhs_f(s, Form::divergence), rhs_f(s, Form::nondivergence)) <= 1e-9);
  }
}

TEST_CASE("moment-equation commutation: theta averages of rhs_f") {
  ModelState s(dealias(random_positive_state(kGrid, 4, 31)));
  RealField r = rhs_f(s, Form::divergence);
  const double scale = std::max(1.0, lq_norm(r, 2.0));

  CHECK(lq_norm(subtract(moment_tensor(r, 0), rhs_rho(s.moments())), 2.0) <= 1e-10 * scale);
  CHECK(lq_norm(subtract(moment_tensor(r, 1), rhs_p(s)), 2.0) <= 1e-10 * scale);
  CHECK(lq_norm(subtract(moment_tensor(r, 2), rhs_tensor(s, 2)), 2.0) <= 1e-10 * scale);

  CHECK_THROWS_AS(rhs_tensor(s, 3), std::invalid_argument);  // needs pi^4 beyond max
}

TEST_CASE("barrier equation: constant density gives zero, defect term is nonpositive") {
  ModelState s(constant_field(kGrid, 0.05));
  HFunction h = make_power_h(2.0);
  CHECK(lq_norm(rhs_v(s, h, 0.0), kInf) <= 1e-12);

  // The subsolution defect -(h''/h'^2)|grad v|^2 is <= 0 for any admissible
  // h: h'' > 0 makes the coefficient positive.
  ModelState sm = smooth_state();
  const MomentSet& m = sm.moments();
  RealField v(m.rho.grid, 0);
  for (std::size_t p = 0; p < v.point_count(); ++p) v.data[p] = h.h(1.0 - m.rho.data[p]);
  SpectralField V = transform(v);
  RealField vx = inverse(derivative(V, 0, 1)), vy = inverse(derivative(V, 1, 1));
  for (std::size_t p = 0; p < v.point_count(); ++p) {
    const double u = 1.0 - m.rho.data[p];
    const double defect = -(h.d2h(u) / (h.dh(u) * h.dh(u))) *
                          (vx.data[p] * vx.data[p] + vy.data[p] * vy.data[p]);
    CHECK(defect <= 0.0);
  }

  CHECK_THROWS_AS(rhs_v(sm, h, -0.1), std::invalid_argument);
}

TEST_CASE("barrier equation chain rule: finite-difference dv/dt converges with dt") {
  HFunction h = make_power_h(2.0);
  // Mild amplitude keeps the barrier composition h(1 - rho) spectrally
  // resolved, so the comparison floor sits well below the dt range.
  ModelState s0 = smooth_state(kGrid, 0.5, 0.05, 0.01);

  auto fd_error = [&](double dt) {
    SolverConfig cfg;
    cfg.dt = dt;
    ModelState s1 = step(s0, cfg);
    ModelState s2 = step(s1, cfg);
    auto vfield = [&](const ModelState& s) {
      const MomentSet& m = s.moments();
      RealField v(m.rho.grid, 0);
      for (std::size_t p = 0; p < v.point_count(); ++p) v.data[p] = h.h(1.0 - m.rho.data[p]);
      return v;
    };
    RealField v0 = vfield(s0), v2 = vfield(s2);
    RealField fd(v0.grid, 0);
    for (std::size_t p = 0; p < fd.point_count(); ++p)
      fd.data[p] = (v2.data[p] - v0.data[p]) / (2.0 * dt);
    return max_abs_diff(fd, rhs_v(s1, h, 0.0));
  };

  const double e1 = fd_error(2e-3);
  const double e2 = fd_error(1e-3);
  CHECK(e2 <= 0.6 * e1 + 1e-9);
  CHECK(e2 <= 1e-2);
}

TEST_CASE("default barrier epsilon policy") {
  CHECK(default_barrier_epsilon(smooth_state()) == 0.0);
  ModelState tight(sample_scalar(kGrid, [](double x, double, double) {
    return (0.9999995 + 0.0000004 * std::cos(x)) / kTwoPi;
  }));
  CHECK(default_barrier_epsilon(tight) == 1e-6);
}

TEST_CASE("linearized system: zero tangent gives zero, theta average commutes") {
  ModelState s = smooth_state();
  CHECK(lq_norm(rhs_fdot(s, RealField(kGrid, 0)), kInf) <= 1e-13);

  RealField zrho(TorusGrid::omega(kGrid.n[0], kGrid.n[1]), 0);
  RealField zp(zrho.grid, 1);
  CHECK(lq_norm(rhs_rhodot(s, zrho, zp), kInf) <= 1e-13);

  RealField fdot = dealias(random_band_limited(kGrid, 3, 55));
  RealField lhs = moment_tensor(rhs_fdot(s, fdot), 0);
  RealField rhs = rhs_rhodot(s, moment_tensor(fdot, 0), moment_tensor(fdot, 1));
  CHECK(lq_norm(subtract(lhs, rhs), 2.0) <= 1e-10 * std::max(1.0, lq_norm(rhs, 2.0)));

  CHECK_THROWS_AS(rhs_fdot(s, RealField{}), std::invalid_argument);
}

TEST_CASE("tangent consistency: rhs_fdot matches the time derivative of rhs_f") {
  // With fdot = rhs_f(state), rhs_fdot approximates d/dt rhs_f along the
  // flow; compare against a centered difference of rhs_f over the stepper.
  ModelState s0 = smooth_state();

  auto residual = [&](double dt) {
    SolverConfig cfg;
    cfg.dt = dt;
    ModelState s1 = step(s0, cfg);
    ModelState s2 = step(s1, cfg);
    RealField r0 = rhs_f(s0, Form::divergence);
    RealField r1 = rhs_f(s1, Form::divergence);
    RealField r2 = rhs_f(s2, Form::divergence);
    RealField fd(r0.grid, 0);
    for (std::size_t p = 0; p < fd.point_count(); ++p)
      fd.data[p] = (r2.data[p] - r0.data[p]) / (2.0 * dt);
    return rel_l2(fd, rhs_fdot(s1, r1));
  };

  const double e1 = residual(4e-3);
  const double e2 = residual(2e-3);
  CHECK(e2 <= 0.6 * e1 + 1e-10);
}

TEST_CASE("cached moments are recomputed when f is rewritten") {
  ModelState s = smooth_state();
  const double rho_max_before = lq_norm(s.moments().rho, kInf);
  RealField doubled = s.f();
  for (double& v : doubled.data) v *= 0.5;
  s.set_f(std::move(doubled), s.time(), s.step());
  CHECK(lq_norm(s.moments().rho, kInf) == doctest::Approx(0.5 * rho_max_before));
}

TEST_CASE("stepper: constant states are stationary to roundoff") {
  ModelState s(constant_field(kGrid, 0.05));
  SolverConfig cfg;
  cfg.dt = 5e-3;
  ModelState cur = s;
  for (int i = 0; i < 100; ++i) cur = step(cur, cfg);
  CHECK(max_abs_diff(cur.f(), s.f()) <= 1e-12 * 0.05);
}

TEST_CASE("stepper: pure-heat reduction reproduces exp(-t) decay of cos(x)") {
  RealField f = sample_scalar(kGrid, [](double x, double, double) {
    return (0.5 + 0.2 * std::cos(x)) / kTwoPi;
  });
  ModelState s(std::move(f));
  SolverConfig cfg;
  cfg.dt = 1e-3;
  cfg.terms.drift = false;
  cfg.terms.cross_diffusion = false;

  const int steps = 200;
  ModelState cur = s;
  for (int i = 0; i < steps; ++i) cur = step(cur, cfg);
  const double t = steps * cfg.dt;

  RealField expect = sample_scalar(kGrid, [&](double x, double, double) {
    return (0.5 + 0.2 * std::exp(-t) * std::cos(x)) / kTwoPi;
  });
  CHECK(max_abs_diff(cur.f(), expect) <= 1e-6);
}

TEST_CASE("stepper: mass is conserved to roundoff") {
  ModelState s = smooth_state();
  SolverConfig cfg;
  cfg.dt = 4e-3;
  cfg.t_end = 0.2;
  RunResult rr = run(s, cfg, {});
  REQUIRE(rr.status == RunStatus::ok);
  CHECK(std::fabs(rr.final_state.mass() - s.mass()) <= 1e-11 * s.mass());
}

TEST_CASE("run: cadence, galerkin projection, dt estimate") {
  ModelState s = smooth_state();
  const double bound = estimate_dt(s);
  CHECK(bound > 0.0);
  CHECK(bound <= 0.25 * std::pow(kTwoPi / 16, 2.0) * (1.0 + 1e-12));

  SolverConfig cfg;
  cfg.dt = 0.0;  // auto
  cfg.t_end = 0.3;
  cfg.diagnostics_cadence = 2;
  cfg.galerkin_cutoff = 3;
  TrajectoryRecorder rec;
  RunResult rr = run(s, cfg, {&rec});
  CHECK(rr.status == RunStatus::ok);
  CHECK(rr.dt_used == doctest::Approx(bound));
  CHECK(rec.trajectory().size() >= 4);

  SpectralField F = transform(rr.final_state.f());
  for (std::size_t p = 0; p < kGrid.point_count(); ++p) {
    std::size_t rem = p;
    long k2 = 0;
    for (int a = 0; a < 3; ++a) {
      const int i = static_cast<int>(rem % kGrid.n[a]);
      rem /= kGrid.n[a];
      const long k = wavenumber(kGrid.n[a], i);
      k2 += k * k;
    }
    if (k2 > 9) CHECK(std::abs(F.data[p]) <= 1e-10);
  }
}

TEST_CASE("run aborts when the occupancy bound is crossed") {
  ModelState s(constant_field(kGrid, 1.02 / kTwoPi));  // rho = 1.02
  SolverConfig cfg;
  cfg.dt = 1e-3;
  cfg.t_end = 0.01;
  RunResult rr = run(s, cfg, {});
  CHECK(rr.status == RunStatus::aborted_rho_exceeds_one);
  CHECK(rr.message.find("rho exceeded") != std::string::npos);
}

TEST_CASE("stepper is second order in time") {
  ModelState s = smooth_state();
  auto advance = [&](double dt, double t_end) {
    SolverConfig cfg;
    cfg.dt = dt;
    cfg.t_end = t_end;
    cfg.diagnostics_cadence = 1000000;
    return run(s, cfg, {}).final_state.f();
  };
  const double T = 0.04;
  RealField ref = advance(5e-4, T);
  const double e1 = rel_l2(advance(4e-3, T), ref);
  const double e2 = rel_l2(advance(2e-3, T), ref);
  CHECK(e1 / e2 >= 3.5);
}
