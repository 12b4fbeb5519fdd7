#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "taf/field.hpp"
#include "taf/hfunction.hpp"
#include "taf/moments.hpp"
#include "taf/sinks.hpp"

namespace taf {

/// Right-hand-side assembly for the kinetic equation
///   df/dt + div((1-rho) f e(theta)) = div((1-rho) grad f + f grad rho) + d2f/dtheta2
/// and its angle-averaged companions, plus an IMEX pseudo-spectral stepper:
/// the full space-angle Laplacian is integrated exactly by the factor
/// exp(-|k|^2 dt) in coefficient space and everything else is advanced
/// explicitly with a strong-stability-preserving second-order stage pair.

enum class Form { divergence, nondivergence };

/// Term switches. Disabling both drift and cross_diffusion leaves the pure
/// space-angle heat flow, for which the stepper is exact.
struct TermToggles {
  bool drift = true;
  bool cross_diffusion = true;
};

struct SolverConfig {
  double dt = 0.0;              // 0 => use estimate_dt at run start
  double t_end = 1.0;
  Form form = Form::divergence;
  TermToggles terms;
  int galerkin_cutoff = 0;      // 0 => none; else project f after each step
  int diagnostics_cadence = 10; // steps between emitted samples
  bool dealiasing = true;
  double rho_abort_excess = 1e-6;   // abort when max rho > 1 + this
  double entropy_eps_floor = 1e-12;
};

/// Distribution snapshot with lazily cached moments. The cache is
/// invalidated on every write to f, so reads are always consistent.
class ModelState {
 public:
  ModelState() = default;
  explicit ModelState(RealField f, double time = 0.0, long step = 0, int max_moment_order = 3);

  const RealField& f() const { return f_; }
  double time() const { return time_; }
  long step() const { return step_; }
  int max_moment_order() const { return max_moment_order_; }

  void set_f(RealField f, double time, long step);
  const MomentSet& moments() const;
  double mass() const;

 private:
  RealField f_;
  double time_ = 0.0;
  long step_ = 0;
  int max_moment_order_ = 3;
  mutable std::shared_ptr<const MomentSet> cache_;
};

/// Full right-hand side for f in the requested form. Both forms agree to
/// roundoff on band-limited states: expanding the diffusive flux cancels
/// the grad f . grad rho cross terms exactly.
RealField rhs_f(const ModelState& state, Form form, const TermToggles& terms = {},
                bool dealiasing = true);

/// drho/dt = -div((1-rho) p) + Lap rho. Equals the theta-integral of rhs_f.
RealField rhs_rho(const MomentSet& m, bool dealiasing = true);

/// dp/dt = -div((1-rho) P) + div((1-rho) grad p + p (x) grad rho) - p.
RealField rhs_p(const ModelState& state, bool dealiasing = true);

/// dpi^n/dt = -div((1-rho) pi^{n+1}) + div((1-rho) grad pi^n + pi^n (x) grad rho)
///            + source moment of order n. Requires n+1 <= max_moment_order.
RealField rhs_tensor(const ModelState& state, int n, bool dealiasing = true);

/// Thrown by rhs_v when u + epsilon <= 0 somewhere; carries the first
/// offending flat index.
struct BarrierDomainError : std::runtime_error {
  std::size_t index;
  BarrierDomainError(const std::string& msg, std::size_t idx)
      : std::runtime_error(msg), index(idx) {}
};

/// dv/dt for v = h(u + epsilon), u = 1 - rho:
///   div(p u h'(u+eps)) - (u h''/h')(u+eps) p . grad v + Lap v
///   - (h''/h'^2)(u+eps) |grad v|^2.
/// The final term is the nonpositive defect that makes v a subsolution of
/// the linear comparison equation. epsilon < 0 is rejected.
RealField rhs_v(const ModelState& state, const HFunction& h, double epsilon,
                bool dealiasing = true);

/// Default epsilon policy: 0 while min u stays above 1e-6, else 1e-6.
double default_barrier_epsilon(const ModelState& state);

/// Linearized (first time-derivative) system. fdot is the tangent field;
/// rhodot and pdot are its moments (computed internally for rhs_fdot).
RealField rhs_fdot(const ModelState& state, const RealField& fdot, bool dealiasing = true);
RealField rhs_rhodot(const ModelState& state, const RealField& rhodot, const RealField& pdot,
                     bool dealiasing = true);

/// Pre-run stability estimate: 0.25 * min(spacing)^2 / max(1, |grad rho|_inf).
double estimate_dt(const ModelState& state);

/// One IMEX step of size dt (taken from config; config.dt must be > 0 here).
ModelState step(const ModelState& state, const SolverConfig& config);

/// Stored samples of a run at the diagnostics cadence.
struct Trajectory {
  std::vector<double> times;
  std::vector<RealField> fields;

  std::size_t size() const { return times.size(); }
  ModelState state_at(std::size_t i) const { return ModelState(fields[i], times[i]); }
  /// Index of the latest sample with time <= t + tiny slack.
  std::size_t index_at(double t) const;
};

class TrajectoryRecorder : public DiagnosticsSink {
 public:
  void on_sample(const DiagnosticsRow& row, const ModelState& state) override;
  const Trajectory& trajectory() const { return traj_; }

 private:
  Trajectory traj_;
};

enum class RunStatus { ok, aborted_nonfinite, aborted_rho_exceeds_one };

struct RunResult {
  RunStatus status = RunStatus::ok;
  std::string message;
  ModelState final_state;      // last good state on abort
  long steps_taken = 0;
  double dt_used = 0.0;
};

/// Advance from `state` to config.t_end, emitting diagnostics rows at the
/// cadence (plus the initial and final samples). On NaN/Inf or an occupancy
/// violation the run stops and reports the last good state.
RunResult run(const ModelState& state, const SolverConfig& config,
              const std::vector<DiagnosticsSink*>& sinks);

/// Diagnostics row for a state (shared by run() and the CLI inspect path).
DiagnosticsRow make_row(const ModelState& state, double mass0, const SolverConfig& config);

}  // namespace taf
