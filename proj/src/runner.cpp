#include "taf/runner.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>

#include <json.hpp>

#include "taf/checkpoint.hpp"
#include "taf/sinks.hpp"
#include "taf/spectral.hpp"
#include "taf/uniqueness.hpp"

namespace taf {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

RealField smooth_profile(const TorusGrid& g, double rho_mean, double rho_amp,
                         double theta_amp) {
  RealField f(g, 0);
  for (int l = 0; l < g.n[2]; ++l)
    for (int j = 0; j < g.n[1]; ++j)
      for (int i = 0; i < g.n[0]; ++i) {
        const double x = g.coord(0, i), y = g.coord(1, j), th = g.coord(2, l);
        f.data[g.index(i, j, l)] =
            (rho_mean + rho_amp * std::cos(x)) / kTwoPi + theta_amp * std::cos(th) * std::cos(y);
      }
  return f;
}

RealField noise_profile(const TorusGrid& g, double rho_mean, double noise_amp,
                        std::uint64_t seed) {
  // Band-limited noise through a seeded spectral draw: modes with every
  // |k_axis| <= 3 get unit-variance Gaussian coefficients, conjugate
  // symmetry is imposed by construction, and the result is normalized to
  // unit sup norm.
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  RealField eta(g, 0);
  for (int kx = 0; kx <= 3; ++kx)
    for (int ky = -3; ky <= 3; ++ky)
      for (int kt = -3; kt <= 3; ++kt) {
        if (kx == 0 && (ky < 0 || (ky == 0 && kt <= 0))) continue;  // one per conjugate pair
        const double a = gauss(rng), b = gauss(rng);
        for (int l = 0; l < g.n[2]; ++l)
          for (int j = 0; j < g.n[1]; ++j)
            for (int i = 0; i < g.n[0]; ++i) {
              const double phase =
                  kx * g.coord(0, i) + ky * g.coord(1, j) + kt * g.coord(2, l);
              eta.data[g.index(i, j, l)] += a * std::cos(phase) - b * std::sin(phase);
            }
      }
  double sup = 0.0;
  for (double v : eta.data) sup = std::max(sup, std::fabs(v));
  if (sup == 0.0) sup = 1.0;

  RealField f(g, 0);
  const double base = rho_mean / kTwoPi;
  for (std::size_t p = 0; p < f.point_count(); ++p)
    f.data[p] = base * (1.0 + noise_amp * eta.data[p] / sup);
  return f;
}

class CheckpointSink : public DiagnosticsSink {
 public:
  CheckpointSink(std::string dir, int cadence) : dir_(std::move(dir)), cadence_(cadence) {}
  void on_sample(const DiagnosticsRow&, const ModelState& state) override {
    if (cadence_ > 0 && count_ % cadence_ == 0) {
      char name[64];
      std::snprintf(name, sizeof name, "checkpoint_%08ld.taf", state.step());
      last_ = dir_ + "/" + name;
      save_checkpoint(state, last_);
    }
    ++count_;
  }
  const std::string& last() const { return last_; }

 private:
  std::string dir_;
  int cadence_;
  long count_ = 0;
  std::string last_;
};

void write_pair_csv(const std::string& path, const std::vector<PairSeriesRow>& rows) {
  std::ofstream out(path, std::ios::trunc);
  out << "t,L2_f_bar,Linf_rho_bar,ratio,recon_defect,gronwall_envelope\n";
  for (const auto& r : rows)
    out << fmt(r.t) << ',' << fmt(r.l2_f_bar) << ',' << fmt(r.linf_rho_bar) << ','
        << fmt(r.ratio) << ',' << fmt(r.recon_defect) << ',' << fmt(r.envelope) << "\n";
}

}  // namespace

std::string resolve_output_dir(const std::string& dir) {
  std::filesystem::path p(dir);
  if (p.is_relative()) {
    if (const char* root = std::getenv("TAF_OUTPUT_ROOT")) p = std::filesystem::path(root) / p;
  }
  std::filesystem::create_directories(p);
  return p.string();
}

ModelState build_initial_state(const RunConfig& config) {
  const TorusGrid g = config.grid();
  RealField f;
  if (config.scenario == "constant") {
    f = constant_field(g, config.rho_mean / kTwoPi);
  } else if (config.scenario == "smooth" || config.scenario == "uniqueness-pair") {
    f = smooth_profile(g, config.rho_mean, config.rho_amp, config.theta_amp);
  } else if (config.scenario == "near-degenerate") {
    // Occupancy profile peaking at rho_0 = 0.95.
    f = smooth_profile(g, 0.55, 0.40, config.theta_amp);
  } else if (config.scenario == "noise") {
    f = noise_profile(g, config.rho_mean, config.noise_amp, config.seed);
  } else {
    throw ConfigError("build_initial_state: unknown scenario '" + config.scenario + "'");
  }

  double min_f = f.data[0], max_rho = 0.0;
  for (double v : f.data) min_f = std::min(min_f, v);
  RealField rho = moment_tensor(f, 0);
  for (double v : rho.data) max_rho = std::max(max_rho, v);
  if (min_f <= 0.0)
    throw ConfigError("scenario '" + config.scenario +
                      "': parameters produce f <= 0 (min f = " + fmt(min_f) + ")");
  if (max_rho >= 1.0)
    throw ConfigError("scenario '" + config.scenario +
                      "': parameters produce rho >= 1 (max rho = " + fmt(max_rho) + ")");
  return ModelState(std::move(f));
}

ScenarioResult run_scenario(const RunConfig& config) {
  ScenarioResult result;
  ordered_json events = ordered_json::array();

  try {
    result.output_dir = resolve_output_dir(config.output_dir);
    ModelState initial = build_initial_state(config);

    // Pre-run stability estimate gates a user-supplied dt.
    const double dt_bound = estimate_dt(initial);
    if (config.solver.dt > 0.0 && config.solver.dt > dt_bound * (1.0 + 1e-12)) {
      result.exit_code = kExitConfigError;
      result.message = "config: dt = " + fmt(config.solver.dt) +
                       " exceeds the pre-run stability estimate " + fmt(dt_bound);
      return result;
    }

    {
      std::ofstream echo_out(result.output_dir + "/config_echo.txt", std::ios::trunc);
      echo_out << echo(config);
    }
    events.push_back({{"event", "run_start"},
                      {"scenario", config.scenario},
                      {"dt_bound", dt_bound},
                      {"grid", {config.nx, config.ny, config.ntheta}}});

    CsvSink csv(result.output_dir + "/diagnostics.csv");
    CheckpointSink ckpt(result.output_dir, config.checkpoint_cadence);
    std::vector<DiagnosticsSink*> sinks = {&csv, &ckpt};

    RunResult rr = run(initial, config.solver, sinks);

    const std::string final_path = result.output_dir + "/final.taf";
    save_checkpoint(rr.final_state, final_path);
    result.last_checkpoint = ckpt.last().empty() ? final_path : ckpt.last();

    if (rr.status != RunStatus::ok) {
      events.push_back({{"event", "abort"},
                        {"reason", rr.status == RunStatus::aborted_nonfinite
                                       ? "non_finite"
                                       : "rho_exceeds_one"},
                        {"message", rr.message},
                        {"t", rr.final_state.time()},
                        {"step", rr.final_state.step()},
                        {"last_checkpoint", final_path}});
      result.exit_code = kExitNumericalAbort;
      result.message = rr.message + " (last checkpoint: " + final_path + ")";
    } else {
      result.exit_code = kExitOk;
    }

    if (config.scenario == "uniqueness-pair" && rr.status == RunStatus::ok) {
      PerturbationSpec spec;
      spec.delta = config.delta;
      spec.perturb_rho = config.perturb_rho;
      PairedTrajectory pair = run_pair(initial, config.solver, spec);
      PeriodicHeatKernel kernel;
      write_pair_csv(result.output_dir + "/pair.csv", pair_series(pair, kernel));
      events.push_back({{"event", "pair_written"}, {"delta", config.delta}});
    }

    events.push_back({{"event", "run_end"},
                      {"status", result.exit_code == kExitOk ? "ok" : "aborted"},
                      {"steps", rr.steps_taken},
                      {"dt_used", rr.dt_used}});
  } catch (const ConfigError& e) {
    result.exit_code = kExitConfigError;
    result.message = e.what();
  } catch (const std::exception& e) {
    result.exit_code = kExitNumericalAbort;
    result.message = e.what();
  }

  if (!result.output_dir.empty()) {
    std::ofstream out(result.output_dir + "/events.json", std::ios::trunc);
    out << events.dump(2) << "\n";
  }
  return result;
}

}  // namespace taf
