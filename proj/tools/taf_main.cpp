// taf: pseudo-spectral simulator and verification harness for an
// angle-averaged active-particle model on the periodic box.
//
// Subcommands:
//   run <config>          integrate a scenario, writing diagnostics/checkpoints
//   kernel-table          tabulate heat-kernel gradient space-time norms
//   uniqueness <config>   evolve a perturbed pair and write the pair series
//   inspect <checkpoint>  print summary statistics of a stored state
//
// Exit codes: 0 ok, 2 configuration error, 3 numerical abort.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "taf/checkpoint.hpp"
#include "taf/config.hpp"
#include "taf/heatkernel.hpp"
#include "taf/runner.hpp"
#include "taf/spectral.hpp"

namespace {

int cmd_run(const std::string& config_path, bool quiet) {
  taf::RunConfig cfg;
  try {
    cfg = taf::parse_config_file(config_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return taf::kExitConfigError;
  }
  if (!quiet) std::cout << taf::echo(cfg);
  taf::ScenarioResult res = taf::run_scenario(cfg);
  if (res.exit_code != taf::kExitOk) std::cerr << "error: " << res.message << "\n";
  if (!quiet && res.exit_code == taf::kExitOk)
    std::cout << "ok: outputs in " << res.output_dir << "\n";
  return res.exit_code;
}

int cmd_kernel_table(const std::vector<double>& qs, double tmin, double tmax, int points,
                     const std::string& out_path) {
  try {
    taf::PeriodicHeatKernel kernel;
    std::ostringstream out;
    out << "q,t,grad_lq_norm\n";
    for (double q : qs) {
      for (int i = 0; i < points; ++i) {
        const double t =
            (points == 1) ? tmax
                          : tmin * std::pow(tmax / tmin, static_cast<double>(i) / (points - 1));
        char buf[96];
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", q, t,
                      kernel.grad_lq_spacetime_norm(q, t));
        out << buf;
      }
    }
    if (out_path.empty()) {
      std::cout << out.str();
    } else {
      std::ofstream f(out_path, std::ios::trunc);
      if (!f) throw std::runtime_error("cannot open '" + out_path + "'");
      f << out.str();
    }
    return taf::kExitOk;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return taf::kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return taf::kExitNumericalAbort;
  }
}

int cmd_uniqueness(const std::string& config_path) {
  taf::RunConfig cfg;
  try {
    cfg = taf::parse_config_file(config_path);
    cfg.scenario = "uniqueness-pair";
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return taf::kExitConfigError;
  }
  taf::ScenarioResult res = taf::run_scenario(cfg);
  if (res.exit_code != taf::kExitOk) std::cerr << "error: " << res.message << "\n";
  return res.exit_code;
}

int cmd_inspect(const std::string& path) {
  try {
    taf::ModelState state = taf::load_checkpoint(path);
    const taf::RealField& f = state.f();
    const taf::MomentSet& m = state.moments();
    double min_f = f.data[0], max_f = f.data[0], max_rho = m.rho.data[0];
    for (double v : f.data) {
      min_f = std::min(min_f, v);
      max_f = std::max(max_f, v);
    }
    for (double v : m.rho.data) max_rho = std::max(max_rho, v);

    std::printf("grid: %d x %d x %d\n", f.grid.n[0], f.grid.n[1], f.grid.n[2]);
    std::printf("time: %.17g\n", state.time());
    std::printf("step: %ld\n", state.step());
    std::printf("mass: %.17g\n", state.mass());
    std::printf("min f: %.17g\nmax f: %.17g\n", min_f, max_f);
    std::printf("min (1-rho): %.17g\n", 1.0 - max_rho);
    std::printf("L2 f: %.17g\n", taf::lq_norm(f, 2.0));
    return taf::kExitOk;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return taf::kExitConfigError;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pseudo-spectral active-matter simulator and verification harness"};
  app.require_subcommand(1);

  std::string config_path;
  bool quiet = false;
  auto* run_cmd = app.add_subcommand("run", "integrate a scenario from a config file");
  run_cmd->add_option("config", config_path, "configuration file")->required();
  run_cmd->add_flag("--quiet", quiet, "suppress the canonical config echo");

  std::vector<double> qs{1.0, 1.1, 1.2};
  double tmin = 0.005, tmax = 0.05;
  int points = 8;
  std::string table_out;
  auto* table_cmd =
      app.add_subcommand("kernel-table", "heat-kernel gradient norm table as CSV");
  table_cmd->add_option("--q", qs, "exponents q in [1, 4/3)");
  table_cmd->add_option("--tmin", tmin, "smallest time");
  table_cmd->add_option("--tmax", tmax, "largest time");
  table_cmd->add_option("--points", points, "geometric time samples per q");
  table_cmd->add_option("--out", table_out, "output path (default stdout)");

  std::string uniq_config;
  auto* uniq_cmd =
      app.add_subcommand("uniqueness", "run a perturbed pair and write pair.csv");
  uniq_cmd->add_option("config", uniq_config, "configuration file")->required();

  std::string ckpt_path;
  auto* inspect_cmd = app.add_subcommand("inspect", "summarize a checkpoint file");
  inspect_cmd->add_option("checkpoint", ckpt_path, "checkpoint file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : taf::kExitConfigError;
  }

  if (run_cmd->parsed()) return cmd_run(config_path, quiet);
  if (table_cmd->parsed()) return cmd_kernel_table(qs, tmin, tmax, points, table_out);
  if (uniq_cmd->parsed()) return cmd_uniqueness(uniq_config);
  if (inspect_cmd->parsed()) return cmd_inspect(ckpt_path);
  return taf::kExitConfigError;
}
