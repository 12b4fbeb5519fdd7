#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "taf/moments.hpp"
#include "taf/spectral.hpp"
#include "testutil.hpp"

using namespace taf;
using namespace taf::testutil;

namespace {
const double kInf = std::numeric_limits<double>::infinity();
const TorusGrid kGrid = TorusGrid::upsilon(16, 16, 32);
}

TEST_CASE("constant distribution: rho = 2 pi c, p = 0, P = pi c Id") {
  const double c = 0.03;
  RealField f = constant_field(kGrid, c);

  RealField rho = moment_tensor(f, 0);
  for (double v : rho.data) CHECK(v == doctest::Approx(kTwoPi * c).epsilon(1e-13));

  RealField p = moment_tensor(f, 1);
  CHECK(lq_norm(p, kInf) <= 1e-14);

  RealField P = moment_tensor(f, 2);
  for (std::size_t q = 0; q < P.point_count(); ++q) {
    CHECK(P.at(0, q) == doctest::Approx(M_PI * c).epsilon(1e-12));  // cos^2 slot
    CHECK(P.at(3, q) == doctest::Approx(M_PI * c).epsilon(1e-12));  // sin^2 slot
    CHECK(std::fabs(P.at(1, q)) <= 1e-14);
    CHECK(std::fabs(P.at(2, q)) <= 1e-14);
  }
}

TEST_CASE("polarisation of c (1 + cos theta) is (pi c, 0)") {
  const double c = 0.02;
  RealField f = sample_scalar(kGrid, [c](double, double, double th) {
    return c * (1.0 + std::cos(th));
  });
  RealField p = moment_tensor(f, 1);
  for (std::size_t q = 0; q < p.point_count(); ++q) {
    CHECK(p.at(0, q) == doctest::Approx(M_PI * c).epsilon(1e-12));
    CHECK(std::fabs(p.at(1, q)) <= 1e-14);
  }
}

TEST_CASE("narrow angular bump: p/rho approaches e(theta_0)") {
  // Von-Mises-like concentration at theta_0; mean direction is exact, the
  // resultant length grows towards 1 with the concentration parameter.
  const double theta0 = 1.1;
  auto resultant = [&](double kappa, int ntheta) {
    const TorusGrid g = TorusGrid::upsilon(8, 8, ntheta);
    RealField f = sample_scalar(g, [&](double, double, double th) {
      return std::exp(kappa * (std::cos(th - theta0) - 1.0));
    });
    RealField rho = moment_tensor(f, 0);
    RealField p = moment_tensor(f, 1);
    return std::array<double, 2>{p.at(0, 0) / rho.data[0], p.at(1, 0) / rho.data[0]};
  };

  auto r8 = resultant(8.0, 64);
  const double mag8 = std::hypot(r8[0], r8[1]);
  CHECK(r8[0] / mag8 == doctest::Approx(std::cos(theta0)).epsilon(1e-10));
  CHECK(r8[1] / mag8 == doctest::Approx(std::sin(theta0)).epsilon(1e-10));

  auto r2 = resultant(2.0, 64);
  CHECK(mag8 > std::hypot(r2[0], r2[1]));  // sharper bump, longer resultant

  // Quadrature oracle at refinement: doubling ntheta changes nothing
  // measurable once the integrand is resolved.
  auto r8f = resultant(8.0, 128);
  CHECK(std::fabs(r8[0] - r8f[0]) <= 1e-12);
  CHECK(std::fabs(r8[1] - r8f[1]) <= 1e-12);
}

TEST_CASE("source moments: order 1 is -p exactly, order 0 vanishes, constant order 2 vanishes") {
  RealField f = random_positive_state(kGrid, 4, 17);

  RealField p = moment_tensor(f, 1);
  RealField src1 = moment_source(f, 1);
  for (std::size_t c = 0; c < 2; ++c)
    for (std::size_t q = 0; q < p.point_count(); ++q)
      CHECK(src1.at(c, q) == doctest::Approx(-p.at(c, q)).epsilon(1e-12));

  RealField src0 = moment_source(f, 0);
  CHECK(lq_norm(src0, kInf) == 0.0);

  RealField fc = constant_field(kGrid, 0.01);
  RealField src2 = moment_source(fc, 2);
  CHECK(lq_norm(src2, kInf) <= 1e-14);
}

TEST_CASE("trace of P equals rho pointwise") {
  RealField f = random_positive_state(kGrid, 4, 23);
  RealField rho = moment_tensor(f, 0);
  RealField P = moment_tensor(f, 2);
  for (std::size_t q = 0; q < rho.point_count(); ++q)
    CHECK(std::fabs(P.at(0, q) + P.at(3, q) - rho.data[q]) <= 1e-10);
}

TEST_CASE("bound chain for nonnegative f: |p| <= rho and max-entry |pi^n| <= n^2 rho") {
  RealField f = random_positive_state(kGrid, 4, 29);
  RealField rho = moment_tensor(f, 0);
  RealField p = moment_tensor(f, 1);
  for (std::size_t q = 0; q < rho.point_count(); ++q)
    CHECK(std::hypot(p.at(0, q), p.at(1, q)) <= rho.data[q] * (1.0 + 1e-12));

  for (int n = 1; n <= 3; ++n) {
    RealField pin = moment_tensor(f, n);
    RealField src = moment_source(f, n);
    for (std::size_t c = 0; c < pin.component_count(); ++c)
      for (std::size_t q = 0; q < rho.point_count(); ++q) {
        CHECK(std::fabs(pin.at(c, q)) <= n * n * rho.data[q] + 1e-12);
        CHECK(std::fabs(src.at(c, q)) <= n * n * rho.data[q] + 1e-12);
      }
  }
}

TEST_CASE("moments are linear in f") {
  RealField a = random_positive_state(kGrid, 3, 5);
  RealField b = random_positive_state(kGrid, 3, 6);
  RealField combo(kGrid, 0);
  for (std::size_t p = 0; p < combo.point_count(); ++p)
    combo.data[p] = 2.0 * a.data[p] - 0.5 * b.data[p];
  for (int n : {0, 1, 2}) {
    RealField mc = moment_tensor(combo, n);
    RealField ma = moment_tensor(a, n);
    RealField mb = moment_tensor(b, n);
    for (std::size_t i = 0; i < mc.data.size(); ++i)
      CHECK(mc.data[i] == doctest::Approx(2.0 * ma.data[i] - 0.5 * mb.data[i]).epsilon(1e-12));
  }
}

TEST_CASE("entropy of a constant distribution matches the closed form") {
  const double c = 0.05;  // rho = 2 pi c < 1
  RealField f = constant_field(kGrid, c);
  const double rho = kTwoPi * c;
  const double vol3 = std::pow(kTwoPi, 3.0), vol2 = kTwoPi * kTwoPi;
  const double expect = vol3 * c * std::log(c) + vol2 * (1.0 - rho) * std::log(1.0 - rho);
  CHECK(entropy(f) == doctest::Approx(expect).epsilon(1e-12));
  CHECK(entropy(f) < 0.0);  // both logs negative at rho = 0.31
}

TEST_CASE("entropy of a perturbed constant against a refined-grid quadrature oracle") {
  auto build = [](const TorusGrid& g) {
    return sample_scalar(g, [](double x, double, double) {
      return 0.05 * (1.0 + 0.1 * std::cos(x));
    });
  };
  const double coarse = entropy(build(TorusGrid::upsilon(16, 8, 8)));
  const double fine = entropy(build(TorusGrid::upsilon(64, 8, 8)));
  CHECK(std::fabs(coarse - fine) <= 1e-8 * std::fabs(fine));
}

TEST_CASE("entropy domain errors carry the violating fraction") {
  RealField f = constant_field(kGrid, 0.2);  // rho = 0.4 pi ~ 1.26 > 1
  try {
    entropy(f);
    FAIL("expected EntropyDomainError");
  } catch (const EntropyDomainError& e) {
    CHECK(e.violating_fraction == doctest::Approx(1.0));
  }

  // Slightly negative values inside the floor are clamped, not rejected.
  RealField tiny = constant_field(kGrid, 0.0);
  for (double& v : tiny.data) v = -0.5e-12;
  CHECK(std::isfinite(entropy(tiny)));

  CHECK_THROWS_AS(moment_tensor(RealField(TorusGrid::omega(8, 8), 0), 0),
                  std::invalid_argument);
  CHECK_THROWS_AS(moment_tensor(constant_field(kGrid, 1.0), -1), std::invalid_argument);
}
