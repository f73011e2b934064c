#include <doctest.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "cce/profile_io.hpp"
#include "cce/run.hpp"

using namespace cce;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("cce_test_run_" + std::to_string(getpid())) / name;
  fs::create_directories(p.parent_path());
  return p;
}

void write_text(const fs::path& p, const std::string& s) {
  std::ofstream out(p);
  out << s;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(CCE_CLI) + " " + args + " > /dev/null 2>&1";
  const int st = std::system(cmd.c_str());
  return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

std::string error_of(const std::string& text) {
  RunConfig cfg;
  try {
    apply_config_text(text, "cfg.json", cfg);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

void write_table(const fs::path& p, const std::vector<double>& x, const std::vector<double>& I1,
                 const std::vector<double>& I2) {
  std::ofstream out(p);
  out << "x,I1,I2\n";
  for (std::size_t i = 0; i < x.size(); ++i)
    out << format_double(x[i]) << ',' << format_double(I1[i]) << ',' << format_double(I2[i]) << '\n';
}

}  // namespace

TEST_CASE("configuration documents") {
  RunConfig cfg;
  apply_config_text(R"({"mode": "probe", "phi0": 2, "starts": 5, "seed": 9, "tol": 1e-10,
                        "output_dir": "out"})",
                    "cfg.json", cfg);
  REQUIRE(cfg.mode);
  CHECK(*cfg.mode == Mode::Probe);
  CHECK(*cfg.phi0 == 2.0);
  CHECK(cfg.starts == 5);
  CHECK(cfg.seed == 9);
  CHECK(cfg.shooter.tol == 1e-10);
  CHECK(cfg.output_dir == "out");

  CHECK(error_of("{\n  \"phi0\": 1,\n  \"phio\": 2\n}") == "cfg.json:3: unknown key 'phio'");
  CHECK(error_of("{\n  \"phi0\": 1,\n  \"starts\": 2.5\n}") == "cfg.json:3: 'starts' must be an integer");
  CHECK(error_of("{\n  \"mode\": \"solver\"\n}") == "cfg.json:2: unknown mode 'solver'");
  CHECK(error_of("{\n  \"phi0\": 1,\n  \"seed\": -1\n}").find("cfg.json:3:") == 0);
  CHECK(error_of("{\n  \"phi0\": 1,\n\n  ]\n}") == "cfg.json:4: invalid JSON");
  CHECK(error_of("[1, 2]") == "cfg.json:1: configuration must be a JSON object");
}

TEST_CASE("configuration validation") {
  RunConfig cfg;
  CHECK_THROWS_AS(validate_config(cfg), ConfigError);
  cfg.mode = Mode::Solve;
  CHECK_THROWS_AS(validate_config(cfg), ConfigError);
  cfg.phi0 = 2.0;
  CHECK(validate_config(cfg).empty());
  cfg.phi0 = 5.0;
  CHECK(validate_config(cfg).size() == 1);
  cfg.phi0 = -1.0;
  CHECK_THROWS_AS(validate_config(cfg), ConfigError);
  cfg.phi0 = 2.0;
  cfg.shooter.rtol = 0.0;
  CHECK_THROWS_AS(validate_config(cfg), ConfigError);
  cfg.shooter.rtol = 1e-12;
  cfg.plane_samples = 99;
  CHECK_THROWS_AS(validate_config(cfg), ConfigError);

  const auto g = scan_grid(0.5, 2.0, 0.1);
  REQUIRE(g.size() == 16);
  CHECK(g.front() == 0.5);
  CHECK(g[3] == 0.8);
  CHECK(g.back() == 2.0);
  CHECK(scan_grid(1.0, 1.0, 0.1).size() == 1);
  CHECK_THROWS_AS(scan_grid(2.0, 1.0, 0.1), ConfigError);
}

TEST_CASE("csv reader reports the offending line") {
  const fs::path p = scratch("bad.csv");
  write_text(p, "x,I1,I2\n0.1,1,1\n\n0.2,1\n");
  try {
    read_csv(p.string());
    FAIL("no error");
  } catch (const DomainError& e) {
    CHECK(std::string(e.what()) == p.string() + ":4: expected 3 fields, found 2");
  }
  write_text(p, "x,I1,I2\n0.1,1,1x\n");
  CHECK_THROWS_WITH_AS(read_csv(p.string()), (p.string() + ":2: not a number: '1x'").c_str(),
                       DomainError);
  write_text(p, "x,I1\n0.1,1\n");
  CHECK_THROWS_AS(validate_profile(p.string()), DomainError);
  CHECK_THROWS_AS(read_csv(scratch("missing.csv").string()), DomainError);
}

TEST_CASE("hyperbolic table validates") {
  std::vector<double> x, one;
  for (int i = 0; i < 200; ++i) {
    x.push_back(0.001 + 0.998 * i / 199.0);
    one.push_back(1.0);
  }
  const ProfileValidation v = validate_table(x, one, one);
  CHECK(v.max_residual < 1e-8);
  CHECK(v.einstein_residual < 1e-8);
  CHECK(v.einstein);
  CHECK(v.sec_min == doctest::Approx(-1.0).epsilon(1e-8));
  CHECK(v.sec_max == doctest::Approx(-1.0).epsilon(1e-8));
  CHECK_THROWS_AS(validate_table({0.1, 0.2}, {1, 1}, {1, 1}), DomainError);
  std::vector<double> bad = x;
  std::swap(bad[3], bad[4]);
  CHECK_THROWS_AS(validate_table(bad, one, one), DomainError);
}

TEST_CASE("exported profiles round-trip") {
  const BvpSolution s = solve_continued(1.25);
  const fs::path p = scratch("profile.csv");
  write_profile_csv(p.string(), s.profile);

  const CsvTable t = read_csv(p.string());
  CHECK(t.header == std::vector<std::string>{"x", "r", "y1", "y2", "dy2", "K", "phi", "I1", "I2",
                                             "Phi", "res1", "res2", "res3", "res4"});
  REQUIRE(t.rows.size() == s.profile.samples.size());
  const auto y2 = t.values("y2");
  for (std::size_t i = 0; i < y2.size(); ++i) CHECK(y2[i] == s.profile.samples[i].y2);

  // the recorded trajectory reproduces the in-memory diagnostics
  const SolutionProfile r = read_profile_csv(p.string());
  const DiagnosticsReport a = diagnostics(s.profile), b = diagnostics(r);
  CHECK(std::fabs(a.max_abs_phi - b.max_abs_phi) < 1e-8);
  CHECK(std::fabs(a.max_closure_residual - b.max_closure_residual) < 1e-8);
  CHECK(b.all_ok());
  const CurvatureReport ca = curvature_report(s.profile), cb = curvature_report(r);
  CHECK(std::fabs(ca.einstein_residual - cb.einstein_residual) < 1e-8);
  CHECK(std::fabs(ca.sec_min - cb.sec_min) < 1e-8);
  CHECK(std::fabs(ca.sec_max - cb.sec_max) < 1e-8);

  const ProfileValidation v = validate_profile(p.string());
  CHECK(v.einstein);
  CHECK(v.max_residual < 1e-5);

  // perturbed eigenvalue table
  auto I1 = t.values("I1");
  for (double& v1 : I1) v1 *= 1.01;
  const ProfileValidation w = validate_table(t.values("x"), I1, t.values("I2"));
  CHECK_FALSE(w.einstein);
  CHECK(w.max_residual > 1e-2);
}

TEST_CASE("run writes summaries and profiles") {
  RunConfig cfg;
  cfg.mode = Mode::Solve;
  cfg.phi0 = 1.0;
  cfg.output_dir = scratch("solve").string();
  std::ostringstream log;
  REQUIRE(run(cfg, log) == kExitOk);
  std::ifstream in(fs::path(cfg.output_dir) / "summary.json");
  const auto j = nlohmann::json::parse(in);
  CHECK(j["converged"] == true);
  CHECK(std::fabs(j["params"]["K0"].get<double>() - 1.0) < 1e-9);
  CHECK(std::fabs(j["params"]["a"].get<double>()) < 1e-9);
  CHECK(std::fabs(j["params"]["q"].get<double>()) < 1e-9);
  CHECK(j["diagnostics"]["monotonicity_ok"] == true);
  CHECK(j.contains("timestamp"));
  CHECK(fs::exists(fs::path(cfg.output_dir) / "profile.csv"));

  cfg.mode = Mode::GenSolve;
  cfg.phi1 = 1.2;
  cfg.phi2 = 0.9;
  cfg.output_dir = scratch("gen").string();
  REQUIRE(run(cfg, log) == kExitOk);
  const CsvTable g = read_csv((fs::path(cfg.output_dir) / "gen_profile.csv").string());
  CHECK(g.header.size() == 19);
  CHECK(g.values("phi1").front() == doctest::Approx(1.2).epsilon(1e-6));
  CHECK(g.values("phi2").front() == doctest::Approx(0.9).epsilon(1e-6));

  cfg.mode = Mode::Curvature;
  cfg.input = scratch("absent.csv").string();
  CHECK(run(cfg, log) == kExitValidation);
}

TEST_CASE("command line exit codes") {
  const fs::path dir = scratch("cli");
  CHECK(run_cli("solve --phi0 1 --out " + dir.string()) == 0);
  CHECK(run_cli("solve --out " + dir.string()) == 3);
  CHECK(run_cli("solve --phi0 nan --out " + dir.string()) == 3);
  CHECK(run_cli("no-such-mode") == 3);

  const fs::path cfg = scratch("cfg.json");
  write_text(cfg, "{\n  \"mode\": \"solve\",\n  \"phi0\": 1,\n  \"tolerence\": 1e-9\n}\n");
  CHECK(run_cli("--config " + cfg.string()) == 3);
  write_text(cfg, "{\"mode\": \"solve\", \"phi0\": 1, \"output_dir\": \"" + (dir / "from_config").string() + "\"}");
  CHECK(run_cli("--config " + cfg.string()) == 0);
  CHECK(fs::exists(dir / "from_config" / "summary.json"));
  CHECK(run_cli("--config " + cfg.string() + " --out " + (dir / "from_flag").string()) == 0);
  CHECK(fs::exists(dir / "from_flag" / "summary.json"));
  const std::string env = "CCE_OUTPUT_DIR=" + (dir / "from_env").string() + " ";
  CHECK(std::system((env + CCE_CLI + " --config " + cfg.string() + " > /dev/null 2>&1").c_str()) == 0);
  CHECK(fs::exists(dir / "from_env" / "summary.json"));

  const fs::path bad = scratch("malformed.csv");
  write_text(bad, "x,I1,I2\n0.1,1,1\n0.2,one,1\n");
  CHECK(run_cli("validate-profile " + bad.string() + " --out " + dir.string()) == 3);
  CHECK(run_cli("curvature --input " + bad.string() + " --out " + dir.string()) == 3);
}
