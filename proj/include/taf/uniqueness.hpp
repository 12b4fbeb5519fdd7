#pragma once

#include <optional>
#include <string>
#include <vector>

#include "taf/evolution.hpp"
#include "taf/heatkernel.hpp"

namespace taf {

/// Two-solution machinery: evolve a pair of states from identical or
/// delta-perturbed data, form the difference fields and their moments, and
/// check the small-time L-infinity mechanism (sup |rho_1 - rho_2| against
/// the space-time L2 of f_1 - f_2), the Duhamel reconstruction of the
/// density difference, and the exponential (Gronwall-type) envelope of
/// || f_1 - f_2 ||_2^2.

struct PerturbationSpec {
  double delta = 1e-3;
  /// Default pattern cos(x) cos(theta): mass- and density-neutral, so the
  /// two runs share rho_0 exactly. With perturb_rho the theta-independent
  /// pattern cos(x)/(2 pi) perturbs rho_0 by delta cos(x) instead.
  bool perturb_rho = false;
};

RealField perturbation_field(const TorusGrid& grid, const PerturbationSpec& spec);

struct PairedTrajectory {
  Trajectory first;
  Trajectory second;
  PerturbationSpec perturbation;
  double dt = 0.0;

  std::size_t size() const { return first.size(); }
  void check_aligned() const;
};

/// Run the pair from `base` and `base + perturbation` under one config.
PairedTrajectory run_pair(const ModelState& base, const SolverConfig& config,
                          const PerturbationSpec& spec);

struct DifferenceFields {
  double t = 0.0;
  RealField f_bar;    // on the 3-D grid
  RealField rho_bar;  // scalar on the spatial grid
  RealField p_bar;    // 2-vector
  RealField P_bar;    // 2x2 matrix
};

/// Differences at the latest sample with time <= t. Moments of the
/// difference coincide with differences of moments by linearity.
DifferenceFields difference_fields(const PairedTrajectory& pair, double t);

struct RatioResult {
  bool defined = false;
  double value = 0.0;
  std::string note;
};

/// sup_{tau <= t} || rho_bar(tau) ||_inf / || f_bar ||_{L2((0,t) x Upsilon)}.
/// Flagged undefined when the denominator is at roundoff (identical runs).
RatioResult linfty_l2_ratio(const PairedTrajectory& pair, double t);

struct DuhamelReconstruction {
  RealField reconstructed;    // rho_bar rebuilt from the forcing series
  double max_defect = 0.0;    // || reconstructed - direct ||_inf
  double rel_defect = 0.0;    // relative to || direct ||_inf
};

/// Rebuild rho_bar(t) from G = (1-rho_1) p_bar - rho_bar p_2 through the
/// heat-kernel Duhamel formula and compare with the directly evolved
/// difference. Requires identical initial densities (the default
/// perturbation pattern); otherwise the homogeneous term is added from the
/// initial density difference.
DuhamelReconstruction duhamel_reconstruction(const PairedTrajectory& pair, double t,
                                             const PeriodicHeatKernel& kernel);

struct GronwallFit {
  bool defined = false;
  double c_hat = 0.0;          // fitted exponent of ||f_bar(t)||^2 ~ e^{c t}
  double r_squared = 0.0;      // fit quality
  double max_envelope_excess = 0.0;  // max of y(t) / (y(0) e^{c t}) - 1
  bool envelope_ok(double tol) const { return defined && max_envelope_excess <= tol; }
};

GronwallFit gronwall_fit(const PairedTrajectory& pair);

/// Series written by the uniqueness CLI: per sample
/// (t, ||f_bar||_2, ||rho_bar||_inf, ratio, reconstruction defect, envelope).
struct PairSeriesRow {
  double t;
  double l2_f_bar;
  double linf_rho_bar;
  double ratio;
  double recon_defect;
  double envelope;
};

std::vector<PairSeriesRow> pair_series(const PairedTrajectory& pair,
                                       const PeriodicHeatKernel& kernel);

}  // namespace taf
