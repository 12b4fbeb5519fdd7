#pragma once

#include <optional>
#include <string>
#include <vector>

#include "taf/evolution.hpp"
#include "taf/field.hpp"
#include "taf/hfunction.hpp"

namespace taf {

/// Estimate-shaped monitors: Stampacchia truncations, the nested
/// time/level ladders with their truncation energies and recursion check,
/// the lower-bound track for 1 - rho, the parabolic interpolation ratio,
/// weak-form residuals, and entropy dissipation.

/// (field - k)_+ pointwise; scalar fields, k >= 0.
RealField stampacchia(const RealField& field, double k);

/// Nested times T_n = t0 (1 - 2^{-n-1}) increasing from t0/2 towards t0,
/// and levels kappa_n = 1 - 2^{-n} increasing from 0 towards 1. L is the
/// normalization of the monitored field (w = v/L or g = f/L).
struct TruncationLadder {
  double t0 = 0.0;
  int n_max = 20;
  double L = 1.0;

  TruncationLadder(double t0_, int n_max_, double L_) : t0(t0_), n_max(n_max_), L(L_) {
    if (!(t0 > 0.0)) throw std::invalid_argument("TruncationLadder: t0 must be > 0");
    if (!(L > 0.0)) throw std::invalid_argument("TruncationLadder: L must be > 0");
  }
  double T(int n) const { return t0 * (1.0 - std::pow(2.0, -n - 1)); }
  double kappa(int n) const { return 1.0 - std::pow(2.0, -n); }
};

enum class LadderVariant { w, g };

/// Truncation energy of level n over [T_n, horizon]:
///   max over stored samples of  || (field/L - kappa_n)_+ ||_2^2
/// + time-trapezoid of           || grad (field/L - kappa_n)_+ ||_2^2,
/// the gradient taken over every axis of the field's grid and restricted
/// to the set where the truncation is positive. The esssup of the
/// continuum object is realized as a max over the stored samples.
double ladder_energy(const std::vector<double>& times, const std::vector<RealField>& fields,
                     const TruncationLadder& ladder, int n, double horizon);

/// Energies for n = 0..n_max. `fields` are the raw monitored fields (v or
/// f); the division by ladder.L happens here.
std::vector<double> ladder_energies(const std::vector<double>& times,
                                    const std::vector<RealField>& fields,
                                    const TruncationLadder& ladder, double horizon);

/// Builders for the two monitored quantities: g = f (variant g, on the 3-D
/// grid) and w = h(1 - rho) (variant w, on the spatial grid).
std::vector<RealField> ladder_fields(const Trajectory& traj, LadderVariant variant,
                                     const HFunction* h = nullptr);

/// Default normalization, shaped like the iteration threshold:
/// L = 2 (||f||_{Linf(t0/2,T;L2)} + ||grad f||_{L2})^2 over the window,
/// with the non-constructive recursion constant replaced by 1.
double default_ladder_scale(const Trajectory& traj, double t0, double horizon);

struct DecayReport {
  bool decays_to_zero = false;
  bool exponent_defined = false;
  double beta = 0.0;     // fitted exponent in W_n ~ C^n W_{n-1}^beta
  double log_c = 0.0;
  int first_zero = -1;   // first index with exactly zero energy, -1 if none
};

/// Checks that the ledger tail decreases monotonically below 1e-10 * W_0
/// (or hits exact zero) and fits the super-linear recursion exponent.
DecayReport recursion_decay_check(const std::vector<double>& ledger);

struct LowerBoundSeries {
  std::vector<double> times;
  std::vector<double> min_one_minus_rho;  // per-sample min over the domain
  std::vector<double> running_inf;        // inf over [t_i, end]
};

LowerBoundSeries lower_bound_track(const Trajectory& traj);

/// || v ||_{L^q(window x domain)} / (|| v ||_{Linf L^m} + || v ||_{L^p W^{1,p}})
/// with q = p (1 + m / n), n the spatial dimension of the fields.
double interpolation_ratio(const std::vector<double>& times,
                           const std::vector<RealField>& fields, double p, double m);

/// Convenience overload monitoring v = rho along a trajectory.
double interpolation_monitor(const Trajectory& traj, double p, double m);

/// Defect of the weak formulation over [t1, t2] against a time-independent
/// test function phi on the 3-D grid:
///   int int [ (1-rho) f e . grad phi - ((1-rho) grad f + f grad rho) . grad phi
///             - df/dtheta dphi/dtheta ] dxi dt - (f, phi)|_{t2} + (f, phi)|_{t1}.
/// phi must be band-limited to the two-thirds band of the grid.
double weak_residual(const Trajectory& traj, double t1, double t2, const RealField& phi);

struct EntropySeries {
  std::vector<double> times;    // interior sample times
  std::vector<double> dEdt;     // centered finite differences
  std::vector<double> entropy;  // per-sample values (aligned with traj)
  /// Largest positive dE/dt, 0 if none.
  double max_positive = 0.0;
};

/// Finite-difference entropy dissipation along a trajectory. With
/// drift_enabled == false the flow is a gradient flow and any dE/dt above
/// `tol` is flagged through `max_positive`.
EntropySeries entropy_dissipation_check(const Trajectory& traj, bool drift_enabled,
                                        double tol = 1e-8);

/// Window summary of the second-derivative estimate for rho:
/// sup_t ||grad rho||_2^2 + int ||Lap rho||_2^2 dt, together with the
/// right-hand side of the closed estimate
/// ||grad rho(t1)||_2^2 + 2 (||grad rho||_2^2 + ||sqrt(1-rho) grad p||_2^2).
struct H2Report {
  double lhs = 0.0;
  double rhs_bound = 0.0;
  bool holds() const { return lhs <= rhs_bound * (1.0 + 1e-9); }
};

H2Report h2_estimate_report(const Trajectory& traj);

}  // namespace taf
