#include "taf/config.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace taf {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing characters");
    return x;
  } catch (const std::exception&) {
    throw ConfigError("config: key '" + key + "' expects a number, got '" + v + "'");
  }
}

long parse_int(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const long x = std::stol(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing characters");
    return x;
  } catch (const std::exception&) {
    throw ConfigError("config: key '" + key + "' expects an integer, got '" + v + "'");
  }
}

bool parse_switch(const std::string& key, const std::string& v) {
  if (v == "on" || v == "true" || v == "1") return true;
  if (v == "off" || v == "false" || v == "0") return false;
  throw ConfigError("config: key '" + key + "' expects on/off, got '" + v + "'");
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

HFunction RunConfig::make_h() const {
  try {
    if (h_family == "power") return make_power_h(h_param);
    if (h_family == "loglog") return make_loglog_h(h_param);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: barrier certificate failed: ") + e.what());
  }
  throw ConfigError("config: unknown h family '" + h_family +
                    "' (expected power or loglog)");
}

RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  std::set<std::string> seen;
  std::string section;

  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string line = raw;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError("config line " + std::to_string(lineno) + ": malformed section");
      section = trim(line.substr(1, line.size() - 2));
      static const std::set<std::string> known = {"grid", "solver", "h", "scenario", "output"};
      if (!known.count(section))
        throw ConfigError("config line " + std::to_string(lineno) + ": unknown section [" +
                          section + "]");
      continue;
    }

    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const std::string qual = section + "." + key;
    if (!seen.insert(qual).second)
      throw ConfigError("config line " + std::to_string(lineno) + ": duplicate key '" + qual +
                        "'");

    if (section == "grid") {
      if (key == "nx") cfg.nx = static_cast<int>(parse_int(qual, value));
      else if (key == "ny") cfg.ny = static_cast<int>(parse_int(qual, value));
      else if (key == "ntheta") cfg.ntheta = static_cast<int>(parse_int(qual, value));
      else throw ConfigError("config: unknown key '" + qual + "'");
    } else if (section == "solver") {
      if (key == "dt") cfg.solver.dt = parse_double(qual, value);
      else if (key == "t_end") cfg.solver.t_end = parse_double(qual, value);
      else if (key == "form") {
        if (value == "divergence") cfg.solver.form = Form::divergence;
        else if (value == "nondivergence") cfg.solver.form = Form::nondivergence;
        else throw ConfigError("config: form must be divergence or nondivergence");
      } else if (key == "galerkin_cutoff") {
        cfg.solver.galerkin_cutoff = static_cast<int>(parse_int(qual, value));
      } else if (key == "cadence") {
        cfg.solver.diagnostics_cadence = static_cast<int>(parse_int(qual, value));
      } else if (key == "checkpoint_cadence") {
        cfg.checkpoint_cadence = static_cast<int>(parse_int(qual, value));
      } else if (key == "dealiasing") {
        cfg.solver.dealiasing = parse_switch(qual, value);
      } else if (key == "drift") {
        cfg.solver.terms.drift = parse_switch(qual, value);
      } else if (key == "cross_diffusion") {
        cfg.solver.terms.cross_diffusion = parse_switch(qual, value);
      } else if (key == "rho_abort_excess") {
        cfg.solver.rho_abort_excess = parse_double(qual, value);
      } else {
        throw ConfigError("config: unknown key '" + qual + "'");
      }
    } else if (section == "h") {
      if (key == "family") cfg.h_family = value;
      else if (key == "q" || key == "c") cfg.h_param = parse_double(qual, value);
      else throw ConfigError("config: unknown key '" + qual + "'");
    } else if (section == "scenario") {
      if (key == "name") cfg.scenario = value;
      else if (key == "rho_mean") cfg.rho_mean = parse_double(qual, value);
      else if (key == "rho_amp") cfg.rho_amp = parse_double(qual, value);
      else if (key == "theta_amp") cfg.theta_amp = parse_double(qual, value);
      else if (key == "noise_amp") cfg.noise_amp = parse_double(qual, value);
      else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(parse_int(qual, value));
      else if (key == "delta") cfg.delta = parse_double(qual, value);
      else if (key == "perturb_rho") cfg.perturb_rho = parse_switch(qual, value);
      else throw ConfigError("config: unknown key '" + qual + "'");
    } else if (section == "output") {
      if (key == "dir") cfg.output_dir = value;
      else throw ConfigError("config: unknown key '" + qual + "'");
    } else {
      throw ConfigError("config line " + std::to_string(lineno) +
                        ": key outside any section");
    }
  }

  // Validation.
  for (int n : {cfg.nx, cfg.ny, cfg.ntheta})
    if (n < 4 || n % 2 != 0)
      throw ConfigError("config: grid sizes must be even and >= 4, got " + std::to_string(n));
  if (cfg.scenario.empty()) throw ConfigError("config: [scenario] name is required");
  static const std::set<std::string> scenarios = {"constant", "smooth", "near-degenerate",
                                                  "noise", "uniqueness-pair"};
  if (!scenarios.count(cfg.scenario))
    throw ConfigError("config: unknown scenario '" + cfg.scenario + "'");
  if (cfg.solver.dt < 0.0) throw ConfigError("config: dt must be >= 0");
  if (!(cfg.solver.t_end > 0.0)) throw ConfigError("config: t_end must be > 0");
  if (cfg.solver.diagnostics_cadence < 1)
    throw ConfigError("config: cadence must be >= 1");
  cfg.make_h();  // barrier certificate must pass
  return cfg;
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string echo(const RunConfig& c) {
  std::ostringstream out;
  out << "[grid]\n";
  out << "nx = " << c.nx << "\n";
  out << "ny = " << c.ny << "\n";
  out << "ntheta = " << c.ntheta << "\n";
  out << "\n[solver]\n";
  out << "dt = " << fmt(c.solver.dt) << "\n";
  out << "t_end = " << fmt(c.solver.t_end) << "\n";
  out << "form = " << (c.solver.form == Form::divergence ? "divergence" : "nondivergence")
      << "\n";
  out << "galerkin_cutoff = " << c.solver.galerkin_cutoff << "\n";
  out << "cadence = " << c.solver.diagnostics_cadence << "\n";
  out << "checkpoint_cadence = " << c.checkpoint_cadence << "\n";
  out << "dealiasing = " << (c.solver.dealiasing ? "on" : "off") << "\n";
  out << "drift = " << (c.solver.terms.drift ? "on" : "off") << "\n";
  out << "cross_diffusion = " << (c.solver.terms.cross_diffusion ? "on" : "off") << "\n";
  out << "rho_abort_excess = " << fmt(c.solver.rho_abort_excess) << "\n";
  out << "\n[h]\n";
  out << "family = " << c.h_family << "\n";
  out << (c.h_family == "loglog" ? "c = " : "q = ") << fmt(c.h_param) << "\n";
  out << "\n[scenario]\n";
  out << "name = " << c.scenario << "\n";
  out << "rho_mean = " << fmt(c.rho_mean) << "\n";
  out << "rho_amp = " << fmt(c.rho_amp) << "\n";
  out << "theta_amp = " << fmt(c.theta_amp) << "\n";
  out << "noise_amp = " << fmt(c.noise_amp) << "\n";
  out << "seed = " << c.seed << "\n";
  out << "delta = " << fmt(c.delta) << "\n";
  out << "perturb_rho = " << (c.perturb_rho ? "on" : "off") << "\n";
  out << "\n[output]\n";
  out << "dir = " << c.output_dir << "\n";
  return out.str();
}

bool operator==(const RunConfig& a, const RunConfig& b) {
  return a.nx == b.nx && a.ny == b.ny && a.ntheta == b.ntheta &&
         a.solver.dt == b.solver.dt && a.solver.t_end == b.solver.t_end &&
         a.solver.form == b.solver.form &&
         a.solver.terms.drift == b.solver.terms.drift &&
         a.solver.terms.cross_diffusion == b.solver.terms.cross_diffusion &&
         a.solver.galerkin_cutoff == b.solver.galerkin_cutoff &&
         a.solver.diagnostics_cadence == b.solver.diagnostics_cadence &&
         a.solver.dealiasing == b.solver.dealiasing &&
         a.solver.rho_abort_excess == b.solver.rho_abort_excess &&
         a.checkpoint_cadence == b.checkpoint_cadence && a.h_family == b.h_family &&
         a.h_param == b.h_param && a.scenario == b.scenario && a.rho_mean == b.rho_mean &&
         a.rho_amp == b.rho_amp && a.theta_amp == b.theta_amp &&
         a.noise_amp == b.noise_amp && a.seed == b.seed && a.delta == b.delta &&
         a.perturb_rho == b.perturb_rho && a.output_dir == b.output_dir;
}

}  // namespace taf
