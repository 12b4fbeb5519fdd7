#pragma once

#include <cstdint>
#include <string>

#include "taf/evolution.hpp"
#include "taf/hfunction.hpp"

namespace taf {

/// Parsed and validated run configuration. The on-disk format is plain
/// "key = value" lines grouped under [section] headers; unknown sections or
/// keys are rejected, as are odd grid sizes and barrier parameters that
/// fail the admissibility certificate. echo() emits the canonical form:
/// parse_config(echo(parse_config(text))) == parse_config(text).
struct RunConfig {
  // [grid]
  int nx = 32;
  int ny = 32;
  int ntheta = 32;

  // [solver]
  SolverConfig solver;
  int checkpoint_cadence = 0;  // samples between checkpoints; 0 = final only

  // [h]
  std::string h_family = "power";
  double h_param = 2.0;        // exponent q (power) or shift c (loglog)

  // [scenario]
  std::string scenario;        // constant | smooth | near-degenerate | noise | uniqueness-pair
  double rho_mean = 0.5;
  double rho_amp = 0.2;
  double theta_amp = 0.02;
  double noise_amp = 0.01;
  std::uint64_t seed = 1;
  double delta = 1e-3;         // uniqueness-pair perturbation amplitude
  bool perturb_rho = false;

  // [output]
  std::string output_dir = "out";

  TorusGrid grid() const { return TorusGrid::upsilon(nx, ny, ntheta); }
  HFunction make_h() const;
};

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

RunConfig parse_config(const std::string& text);
RunConfig parse_config_file(const std::string& path);
std::string echo(const RunConfig& config);

bool operator==(const RunConfig& a, const RunConfig& b);

}  // namespace taf
