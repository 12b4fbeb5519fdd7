#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "taf/checkpoint.hpp"
#include "taf/config.hpp"
#include "taf/runner.hpp"
#include "taf/spectral.hpp"
#include "testutil.hpp"

using namespace taf;
namespace fs = std::filesystem;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char b : bytes) {
    h ^= b;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string fixture_dir() {
  const char* env = std::getenv("TAF_FIXTURE_DIR");
  REQUIRE(env != nullptr);
  return env;
}

fs::path fresh_dir(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("taf_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

const char* kMinimalConfig = R"(
[grid]
nx = 8
ny = 8
ntheta = 8

[scenario]
name = constant
)";

}  // namespace

TEST_CASE("minimal config parses with defaults filled") {
  RunConfig cfg = parse_config(kMinimalConfig);
  CHECK(cfg.nx == 8);
  CHECK(cfg.scenario == "constant");
  CHECK(cfg.solver.t_end == 1.0);
  CHECK(cfg.solver.dealiasing);
  CHECK(cfg.solver.terms.drift);
  CHECK(cfg.h_family == "power");
  CHECK(cfg.h_param == 2.0);
  CHECK(cfg.output_dir == "out");
}

TEST_CASE("echo is canonical: parse(echo(parse(text))) == parse(text)") {
  const char* text = R"(
[grid]
nx = 16
ny = 8
ntheta = 12

[solver]
dt = 0.001        # comment after value
t_end = 0.25
form = nondivergence
dealiasing = off

[h]
family = loglog
c = 1.3

[scenario]
name = smooth
rho_amp = 0.15
seed = 99

[output]
dir = results/run1
)";
  RunConfig a = parse_config(text);
  RunConfig b = parse_config(echo(a));
  CHECK(a == b);
  CHECK(echo(a) == echo(b));
}

TEST_CASE("config rejections: unknown keys, odd grids, malformed values") {
  CHECK_THROWS_AS(parse_config("[grid]\nnx = 8\nny = 8\nntheta = 8\nbogus = 1\n"
                               "[scenario]\nname = constant\n"),
                  ConfigError);
  CHECK_THROWS_AS(parse_config("[mystery]\nx = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("[grid]\nnx = 9\nny = 8\nntheta = 8\n"
                               "[scenario]\nname = constant\n"),
                  ConfigError);
  CHECK_THROWS_AS(parse_config("[grid]\nnx = 8\nny = 8\nntheta = 8\n"
                               "[scenario]\nname = constant\n[solver]\ndt = abc\n"),
                  ConfigError);
  CHECK_THROWS_AS(parse_config("[grid]\nnx = 8\nny = 8\nntheta = 8\n"
                               "[scenario]\nname = nosuch\n"),
                  ConfigError);
  CHECK_THROWS_AS(parse_config("key_without_section = 1\n"), ConfigError);
}

TEST_CASE("barrier certificates at parse time") {
  // q = 2 gives the constant ratio s h''/h' = -3.
  RunConfig cfg = parse_config(kMinimalConfig);
  HFunction h = cfg.make_h();
  CHECK(h.certificate.valid);
  CHECK(h.certificate.ratio_min == doctest::Approx(-3.0).epsilon(1e-9));
  CHECK(h.certificate.ratio_max == doctest::Approx(-3.0).epsilon(1e-9));

  // Adversarial family with h' > 0 is rejected, naming the violated
  // admissibility condition.
  const std::string bad = std::string(kMinimalConfig) + "\n[h]\nfamily = power\nq = -1\n";
  try {
    parse_config(bad);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("h' < 0 < h''") != std::string::npos);
  }

  // The iterated-log family certifies despite its slow divergence.
  const std::string ll = std::string(kMinimalConfig) + "\n[h]\nfamily = loglog\nc = 1.1\n";
  HFunction hl = parse_config(ll).make_h();
  CHECK(hl.certificate.valid);
  CHECK(hl.h(1e-8) > hl.h(1e-4));
  CHECK(hl.h(1e-4) > hl.h(1e-2));
  CHECK(hl.certificate.ratio_min >= -1.0);
  CHECK(hl.certificate.ratio_max <= 0.0);
}

TEST_CASE("checkpoint round trip is bit-exact") {
  const TorusGrid g = TorusGrid::upsilon(8, 8, 8);
  RealField f = testutil::random_positive_state(g, 3, 12345);
  ModelState s(std::move(f), 0.375, 42);

  fs::path dir = fresh_dir("ckpt");
  const std::string p1 = (dir / "a.taf").string();
  const std::string p2 = (dir / "b.taf").string();
  save_checkpoint(s, p1);
  ModelState loaded = load_checkpoint(p1);
  CHECK(loaded.time() == s.time());
  CHECK(loaded.step() == s.step());
  CHECK(loaded.f().data == s.f().data);  // bitwise equality of doubles

  save_checkpoint(loaded, p2);
  CHECK(slurp(p1) == slurp(p2));
}

TEST_CASE("checkpoint corruption is diagnosed") {
  fs::path dir = fresh_dir("ckpt_bad");
  const TorusGrid g = TorusGrid::upsilon(8, 8, 8);
  ModelState s(constant_field(g, 0.01), 0.0, 0);
  const std::string good = (dir / "good.taf").string();
  save_checkpoint(s, good);

  // Truncation: error names expected and actual byte counts.
  std::string bytes = slurp(good);
  const std::string cut = (dir / "cut.taf").string();
  std::ofstream(cut, std::ios::binary).write(bytes.data(), bytes.size() / 2);
  try {
    load_checkpoint(cut);
    FAIL("expected CheckpointError");
  } catch (const CheckpointError& e) {
    const std::string msg = e.what();
    CHECK(msg.find(std::to_string(bytes.size() / 2)) != std::string::npos);
    CHECK(msg.find(std::to_string(bytes.size())) != std::string::npos);
  }

  // Magic mismatch.
  bytes[0] = 'X';
  const std::string wrong = (dir / "wrong.taf").string();
  std::ofstream(wrong, std::ios::binary).write(bytes.data(), bytes.size());
  CHECK_THROWS_WITH_AS(load_checkpoint(wrong),
                       doctest::Contains("magic mismatch"), CheckpointError);

  CHECK_THROWS_AS(load_checkpoint((dir / "missing.taf").string()), CheckpointError);
}

TEST_CASE("committed fixture loads to the frozen checksum") {
  const std::string path = fixture_dir() + "/state_8x8x8.taf";
  const std::string bytes = slurp(path);
  CHECK(bytes.size() == 4130);
  CHECK(fnv1a(bytes) == 0xb76a62b76eba260dull);

  ModelState s = load_checkpoint(path);
  CHECK(s.time() == 0.125);
  CHECK(s.step() == 7);
  CHECK(s.f().grid.n[0] == 8);
  // Re-saving reproduces the committed bytes exactly.
  fs::path dir = fresh_dir("fixture");
  const std::string copy = (dir / "copy.taf").string();
  save_checkpoint(s, copy);
  CHECK(slurp(copy) == bytes);
}

TEST_CASE("run_scenario: constant scenario produces flat diagnostics and exit 0") {
  fs::path dir = fresh_dir("scenario_const");
  RunConfig cfg = parse_config(kMinimalConfig);
  cfg.solver.t_end = 0.05;
  cfg.solver.dt = 0.005;
  cfg.solver.diagnostics_cadence = 2;
  cfg.output_dir = (dir / "out").string();

  ScenarioResult res = run_scenario(cfg);
  CHECK(res.exit_code == kExitOk);
  CHECK(fs::exists(dir / "out" / "diagnostics.csv"));
  CHECK(fs::exists(dir / "out" / "events.json"));
  CHECK(fs::exists(dir / "out" / "final.taf"));
  CHECK(fs::exists(dir / "out" / "config_echo.txt"));

  // Mass column is constant across rows.
  std::istringstream csv(slurp((dir / "out" / "diagnostics.csv").string()));
  std::string line;
  std::getline(csv, line);  // header
  double mass0 = -1.0;
  int rows = 0;
  while (std::getline(csv, line)) {
    std::istringstream row(line);
    std::string cell;
    std::getline(row, cell, ',');  // t
    std::getline(row, cell, ',');  // step
    std::getline(row, cell, ',');  // mass
    const double mass = std::stod(cell);
    if (rows == 0) mass0 = mass;
    CHECK(mass == doctest::Approx(mass0).epsilon(1e-12));
    ++rows;
  }
  CHECK(rows >= 3);
}

TEST_CASE("run_scenario: deterministic reruns are byte-identical") {
  fs::path dir = fresh_dir("determinism");
  RunConfig cfg = parse_config(kMinimalConfig);
  cfg.scenario = "noise";
  cfg.seed = 7;
  cfg.solver.t_end = 0.03;
  cfg.solver.dt = 0.003;
  cfg.solver.diagnostics_cadence = 2;

  cfg.output_dir = (dir / "a").string();
  REQUIRE(run_scenario(cfg).exit_code == kExitOk);
  cfg.output_dir = (dir / "b").string();
  REQUIRE(run_scenario(cfg).exit_code == kExitOk);

  CHECK(slurp((dir / "a" / "diagnostics.csv").string()) ==
        slurp((dir / "b" / "diagnostics.csv").string()));
  CHECK(slurp((dir / "a" / "final.taf").string()) ==
        slurp((dir / "b" / "final.taf").string()));
}

TEST_CASE("run_scenario: dt above the stability estimate is a config error") {
  fs::path dir = fresh_dir("dtbound");
  RunConfig cfg = parse_config(kMinimalConfig);
  cfg.solver.dt = 1.0;  // far above 0.25 h^2
  cfg.output_dir = (dir / "out").string();
  ScenarioResult res = run_scenario(cfg);
  CHECK(res.exit_code == kExitConfigError);
  CHECK(res.message.find("stability estimate") != std::string::npos);
}

TEST_CASE("run_scenario: numerical aborts exit 3 and leave a checkpoint") {
  fs::path dir = fresh_dir("abort");
  RunConfig cfg = parse_config(kMinimalConfig);
  cfg.scenario = "smooth";
  cfg.solver.t_end = 0.05;
  cfg.solver.dt = 0.005;
  // Tighten the occupancy monitor below the actual max rho = 0.7 so the
  // abort machinery fires on the first step.
  cfg.solver.rho_abort_excess = -0.5;
  cfg.output_dir = (dir / "out").string();
  ScenarioResult res = run_scenario(cfg);
  CHECK(res.exit_code == kExitNumericalAbort);
  CHECK(res.message.find("last checkpoint") != std::string::npos);
  CHECK(fs::exists(dir / "out" / "final.taf"));
  const std::string events = slurp((dir / "out" / "events.json").string());
  CHECK(events.find("rho_exceeds_one") != std::string::npos);
}

TEST_CASE("run_scenario: uniqueness pair writes the pair series") {
  fs::path dir = fresh_dir("pair");
  RunConfig cfg = parse_config(kMinimalConfig);
  cfg.scenario = "uniqueness-pair";
  cfg.nx = cfg.ny = cfg.ntheta = 8;
  cfg.delta = 1e-3;
  cfg.solver.t_end = 0.02;
  cfg.solver.dt = 0.002;
  cfg.solver.diagnostics_cadence = 1;
  cfg.output_dir = (dir / "out").string();
  ScenarioResult res = run_scenario(cfg);
  REQUIRE(res.exit_code == kExitOk);
  const std::string pair = slurp((dir / "out" / "pair.csv").string());
  CHECK(pair.find("t,L2_f_bar,Linf_rho_bar,ratio,recon_defect,gronwall_envelope") == 0);
}

TEST_CASE("TAF_OUTPUT_ROOT prefixes relative output directories") {
  fs::path root = fresh_dir("envroot");
  setenv("TAF_OUTPUT_ROOT", root.string().c_str(), 1);
  RunConfig cfg = parse_config(kMinimalConfig);
  cfg.solver.t_end = 0.01;
  cfg.solver.dt = 0.005;
  cfg.output_dir = "nested/out";
  ScenarioResult res = run_scenario(cfg);
  unsetenv("TAF_OUTPUT_ROOT");
  REQUIRE(res.exit_code == kExitOk);
  CHECK(fs::exists(root / "nested" / "out" / "diagnostics.csv"));
}

TEST_CASE("checkpoints are written at the configured cadence") {
  fs::path dir = fresh_dir("ckpt_cadence");
  RunConfig cfg = parse_config(kMinimalConfig);
  cfg.solver.t_end = 0.05;
  cfg.solver.dt = 0.005;
  cfg.solver.diagnostics_cadence = 2;
  cfg.checkpoint_cadence = 2;
  cfg.output_dir = (dir / "out").string();
  REQUIRE(run_scenario(cfg).exit_code == kExitOk);
  int count = 0;
  for (const auto& e : fs::directory_iterator(dir / "out"))
    if (e.path().filename().string().rfind("checkpoint_", 0) == 0) ++count;
  CHECK(count >= 2);
}
