// Command line front end: cce <mode> [options]; see README.md.

#include <CLI11.hpp>
#include <cstdlib>
#include <iostream>

#include "cce/run.hpp"

using namespace cce;

namespace {

template <class T>
void overlay(const CLI::Option* o, const T& v, T& dst) {
  if (o->count() > 0) dst = v;
}

template <class T>
void overlay(const CLI::Option* o, const T& v, std::optional<T>& dst) {
  if (o->count() > 0) dst = v;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Einstein fillings of Berger spheres: solve, scan, probe and check"};
  app.require_subcommand(0, 1);
  app.fallthrough();

  std::string config_path, out;
  double tol = 0, rtol = 0, atol = 0, eps = 0, x_match = 0, max_step = 0, vtol = 0;
  int jet_order = 0, n_out = 0, plane_samples = 0;
  unsigned workers = 0;
  std::uint64_t curvature_seed = 0;
  auto* o_config = app.add_option("--config", config_path, "JSON configuration document")
                       ->check(CLI::ExistingFile);
  auto* o_out = app.add_option("-o,--out", out, "output directory (overrides CCE_OUTPUT_DIR)");
  auto* o_tol = app.add_option("--tol", tol, "Newton tolerance on the match defect");
  auto* o_rtol = app.add_option("--rtol", rtol, "integrator relative tolerance");
  auto* o_atol = app.add_option("--atol", atol, "integrator absolute tolerance");
  auto* o_eps = app.add_option("--eps", eps, "endpoint offset");
  auto* o_xm = app.add_option("--x-match", x_match, "match abscissa");
  auto* o_jet = app.add_option("--jet-order", jet_order, "order of the endpoint jets");
  auto* o_nout = app.add_option("--n-out", n_out, "profile samples per leg");
  auto* o_step = app.add_option("--max-step", max_step, "continuation step");
  auto* o_planes = app.add_option("--plane-samples", plane_samples, "random 2-planes per point");
  auto* o_cseed = app.add_option("--curvature-seed", curvature_seed, "seed for random 2-planes");
  auto* o_vtol = app.add_option("--tolerance", vtol, "validate-profile verdict tolerance");
  auto* o_workers = app.add_option("--workers", workers, "probe threads (0: all cores)");

  double s_phi0 = 0, p_phi0 = 0, from = 0, to = 0, step = 0, phi1 = 0, phi2 = 0, spread = 0;
  int starts = 0;
  std::uint64_t seed = 0;
  std::string curv_input, val_input;

  auto* solve = app.add_subcommand("solve", "solve the boundary value problem for one phi0");
  auto* o_sphi0 = solve->add_option("--phi0", s_phi0, "squashing at infinity");

  auto* scan = app.add_subcommand("scan", "continuation scan over a phi0 grid");
  auto* o_from = scan->add_option("--from", from, "first phi0");
  auto* o_to = scan->add_option("--to", to, "last phi0");
  auto* o_sstep = scan->add_option("--step", step, "grid spacing");

  auto* probe = app.add_subcommand("probe", "multi-start uniqueness probe");
  auto* o_pphi0 = probe->add_option("--phi0", p_phi0, "squashing at infinity");
  auto* o_starts = probe->add_option("--starts", starts, "number of starts");
  auto* o_seed = probe->add_option("--seed", seed, "start sampling seed");
  auto* o_spread = probe->add_option("--spread", spread, "scale of the start box");

  auto* curv = app.add_subcommand("curvature", "curvature report for an exported profile");
  auto* o_cin = curv->add_option("--input", curv_input, "profile CSV");

  auto* gen = app.add_subcommand("gen-solve", "solve the generalized Berger problem");
  auto* o_phi1 = gen->add_option("--phi1", phi1, "lambda2/lambda1 at infinity");
  auto* o_phi2 = gen->add_option("--phi2", phi2, "lambda3/lambda2 at infinity");

  auto* val = app.add_subcommand("validate-profile", "check an (x, I1, I2) table");
  auto* o_vin = val->add_option("path", val_input, "CSV with columns x, I1, I2");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  }

  RunConfig cfg;
  try {
    if (o_config->count() > 0) apply_config_file(config_path, cfg);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  }

  if (solve->parsed()) cfg.mode = Mode::Solve;
  if (scan->parsed()) cfg.mode = Mode::Scan;
  if (probe->parsed()) cfg.mode = Mode::Probe;
  if (curv->parsed()) cfg.mode = Mode::Curvature;
  if (gen->parsed()) cfg.mode = Mode::GenSolve;
  if (val->parsed()) cfg.mode = Mode::ValidateProfile;
  if (!cfg.mode) {
    std::cerr << app.help() << "error: a mode is required (subcommand or \"mode\" in --config)\n";
    return kExitValidation;
  }

  overlay(o_sphi0, s_phi0, cfg.phi0);
  overlay(o_pphi0, p_phi0, cfg.phi0);
  overlay(o_from, from, cfg.from);
  overlay(o_to, to, cfg.to);
  overlay(o_sstep, step, cfg.step);
  overlay(o_starts, starts, cfg.starts);
  overlay(o_seed, seed, cfg.seed);
  overlay(o_spread, spread, cfg.spread);
  overlay(o_cin, curv_input, cfg.input);
  overlay(o_vin, val_input, cfg.input);
  overlay(o_phi1, phi1, cfg.phi1);
  overlay(o_phi2, phi2, cfg.phi2);
  overlay(o_tol, tol, cfg.shooter.tol);
  overlay(o_rtol, rtol, cfg.shooter.rtol);
  overlay(o_atol, atol, cfg.shooter.atol);
  overlay(o_eps, eps, cfg.shooter.eps);
  overlay(o_xm, x_match, cfg.shooter.x_match);
  overlay(o_jet, jet_order, cfg.shooter.jet_order);
  overlay(o_nout, n_out, cfg.shooter.n_out);
  overlay(o_step, max_step, cfg.max_step);
  overlay(o_planes, plane_samples, cfg.plane_samples);
  overlay(o_cseed, curvature_seed, cfg.curvature_seed);
  overlay(o_vtol, vtol, cfg.validation_tolerance);
  overlay(o_workers, workers, cfg.workers);

  // output directory: --out, then the environment, then the configuration
  if (const char* env = std::getenv("CCE_OUTPUT_DIR"); env && *env) cfg.output_dir = env;
  overlay(o_out, out, cfg.output_dir);

  return run(cfg, std::cerr);
}
