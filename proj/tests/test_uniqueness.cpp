#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "taf/spectral.hpp"
#include "taf/uniqueness.hpp"
#include "testutil.hpp"

using namespace taf;
using namespace taf::testutil;

namespace {

const double kInf = std::numeric_limits<double>::infinity();
const TorusGrid kGrid = TorusGrid::upsilon(16, 16, 16);

ModelState base_state() {
  RealField f = sample_scalar(kGrid, [](double x, double y, double th) {
    return (0.5 + 0.2 * std::cos(x)) / kTwoPi + 0.02 * std::cos(th) * std::cos(y);
  });
  return ModelState(std::move(f));
}

SolverConfig pair_config(double t_end = 0.1, int cadence = 1) {
  SolverConfig cfg;
  cfg.dt = 2e-3;
  cfg.t_end = t_end;
  cfg.diagnostics_cadence = cadence;
  return cfg;
}

}  // namespace

TEST_CASE("identical data: difference stays at roundoff and analyses are flagged") {
  PerturbationSpec spec;
  spec.delta = 0.0;
  PairedTrajectory pair = run_pair(base_state(), pair_config(0.05), spec);

  for (std::size_t i = 0; i < pair.size(); ++i) {
    DifferenceFields d = difference_fields(pair, pair.first.times[i]);
    CHECK(lq_norm(d.f_bar, kInf) <= 1e-12);
  }

  RatioResult r = linfty_l2_ratio(pair, 0.05);
  CHECK(!r.defined);
  CHECK(r.note.find("identical") != std::string::npos);

  GronwallFit fit = gronwall_fit(pair);
  CHECK(!fit.defined);
}

TEST_CASE("initial difference is exactly delta times the pattern") {
  PerturbationSpec spec;
  spec.delta = 1e-3;
  PairedTrajectory pair = run_pair(base_state(), pair_config(0.01), spec);

  DifferenceFields d0 = difference_fields(pair, 0.0);
  RealField pattern = perturbation_field(kGrid, PerturbationSpec{1.0, false});
  CHECK(lq_norm(d0.f_bar, 2.0) ==
        doctest::Approx(spec.delta * lq_norm(pattern, 2.0)).epsilon(1e-10));

  // The default pattern leaves the density untouched at t = 0.
  CHECK(lq_norm(d0.rho_bar, kInf) <= 1e-14);

  // Moments of the difference equal differences of moments by linearity.
  RealField m1 = moment_tensor(pair.first.fields[0], 1);
  RealField m2 = moment_tensor(pair.second.fields[0], 1);
  for (std::size_t i = 0; i < m1.data.size(); ++i)
    CHECK(d0.p_bar.data[i] == doctest::Approx(m1.data[i] - m2.data[i]).epsilon(1e-12));
}

TEST_CASE("Jensen bound: ||rho_bar||_2 <= sqrt(2 pi) ||f_bar||_2 at every sample") {
  PerturbationSpec spec;
  spec.delta = 1e-2;
  PairedTrajectory pair = run_pair(base_state(), pair_config(0.1, 5), spec);
  for (std::size_t i = 0; i < pair.size(); ++i) {
    DifferenceFields d = difference_fields(pair, pair.first.times[i]);
    CHECK(lq_norm(d.rho_bar, 2.0) <=
          std::sqrt(kTwoPi) * lq_norm(d.f_bar, 2.0) * (1.0 + 1e-12));
  }
}

TEST_CASE("swapping the pair negates the difference and preserves norms") {
  PerturbationSpec spec;
  spec.delta = 1e-2;
  PairedTrajectory pair = run_pair(base_state(), pair_config(0.05, 5), spec);
  PairedTrajectory swapped = pair;
  std::swap(swapped.first, swapped.second);

  DifferenceFields a = difference_fields(pair, 0.04);
  DifferenceFields b = difference_fields(swapped, 0.04);
  for (std::size_t i = 0; i < a.f_bar.data.size(); ++i)
    CHECK(a.f_bar.data[i] == doctest::Approx(-b.f_bar.data[i]).epsilon(1e-13));
  CHECK(lq_norm(a.f_bar, 2.0) == doctest::Approx(lq_norm(b.f_bar, 2.0)).epsilon(1e-13));

  RatioResult ra = linfty_l2_ratio(pair, 0.05);
  RatioResult rb = linfty_l2_ratio(swapped, 0.05);
  CHECK(ra.value == doctest::Approx(rb.value).epsilon(1e-12));
}

TEST_CASE("ratio is bounded, delta-independent, and improves towards small times") {
  std::vector<double> ratios;
  for (double delta : {1e-2, 1e-3}) {
    PerturbationSpec spec;
    spec.delta = delta;
    PairedTrajectory pair = run_pair(base_state(), pair_config(0.1), spec);
    RatioResult r = linfty_l2_ratio(pair, 0.05);
    REQUIRE(r.defined);
    CHECK(std::isfinite(r.value));
    ratios.push_back(r.value);

    RatioResult r_early = linfty_l2_ratio(pair, 0.01);
    RatioResult r_late = linfty_l2_ratio(pair, 0.1);
    REQUIRE(r_early.defined);
    REQUIRE(r_late.defined);
    CHECK(r_early.value <= r_late.value * 1.1);
  }
  CHECK(std::fabs(ratios[0] - ratios[1]) <= 0.1 * std::max(ratios[0], ratios[1]));
}

TEST_CASE("duhamel reconstruction tracks the evolved density difference") {
  PerturbationSpec spec;
  spec.delta = 1e-2;
  SolverConfig cfg = pair_config(0.05, 1);
  PairedTrajectory pair = run_pair(base_state(), cfg, spec);
  PeriodicHeatKernel kernel;

  DuhamelReconstruction rec = duhamel_reconstruction(pair, 0.05, kernel);
  CHECK(rec.rel_defect <= 5e-3);

  // Halving delta halves both the direct and reconstructed differences.
  PerturbationSpec half = spec;
  half.delta = 5e-3;
  PairedTrajectory pair2 = run_pair(base_state(), cfg, half);
  DuhamelReconstruction rec2 = duhamel_reconstruction(pair2, 0.05, kernel);
  DifferenceFields d1 = difference_fields(pair, 0.05);
  DifferenceFields d2 = difference_fields(pair2, 0.05);
  const double direct_ratio = lq_norm(d1.rho_bar, kInf) / lq_norm(d2.rho_bar, kInf);
  const double recon_ratio =
      lq_norm(rec.reconstructed, kInf) / lq_norm(rec2.reconstructed, kInf);
  CHECK(direct_ratio == doctest::Approx(2.0).epsilon(0.05));
  CHECK(recon_ratio == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("duhamel reconstruction with a density-perturbing pattern") {
  // The homogeneous heat term carries the initial density difference.
  PerturbationSpec spec;
  spec.delta = 1e-2;
  spec.perturb_rho = true;
  PairedTrajectory pair = run_pair(base_state(), pair_config(0.05, 1), spec);
  PeriodicHeatKernel kernel;
  DuhamelReconstruction rec = duhamel_reconstruction(pair, 0.05, kernel);
  CHECK(rec.rel_defect <= 5e-3);
}

TEST_CASE("gronwall envelope holds with delta-independent rate") {
  std::vector<double> rates;
  for (double delta : {1e-2, 1e-4}) {
    PerturbationSpec spec;
    spec.delta = delta;
    PairedTrajectory pair = run_pair(base_state(), pair_config(0.5, 5), spec);
    GronwallFit fit = gronwall_fit(pair);
    REQUIRE(fit.defined);
    CHECK(fit.envelope_ok(0.05));
    CHECK(fit.r_squared > 0.99);
    rates.push_back(fit.c_hat);
  }
  CHECK(std::fabs(rates[0] - rates[1]) <= 0.1 * std::fabs(rates[0]));
}

TEST_CASE("misaligned pairs are rejected") {
  PerturbationSpec spec;
  spec.delta = 1e-3;
  PairedTrajectory pair = run_pair(base_state(), pair_config(0.02), spec);
  PairedTrajectory broken = pair;
  broken.second.times.pop_back();
  broken.second.fields.pop_back();
  CHECK_THROWS_AS(broken.check_aligned(), std::invalid_argument);
}
