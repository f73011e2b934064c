#pragma once

// Batch pipelines behind the command line tool. A RunConfig is assembled from
// defaults, an optional JSON document and command line flags (in increasing
// precedence); run() executes one mode and writes its files into
// output_dir. Summaries are deterministic except for the top-level
// "timestamp" field.

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "cce/errors.hpp"
#include "cce/shooter.hpp"

namespace cce {

enum class Mode { Solve, Scan, Probe, Curvature, GenSolve, ValidateProfile };

std::string mode_name(Mode m);
std::optional<Mode> parse_mode(const std::string& s);

constexpr int kExitOk = 0;
constexpr int kExitConvergence = 2;
constexpr int kExitValidation = 3;

/// Malformed configuration or inconsistent parameters.
class ConfigError : public DomainError {
 public:
  using DomainError::DomainError;
};

struct RunConfig {
  std::optional<Mode> mode;
  std::optional<double> phi0;
  std::optional<double> from, to, step;  // scan grid
  int starts = 20;
  std::uint64_t seed = 1;
  double spread = 1.0;                   // probe box scale
  std::string input;                     // curvature / validate-profile
  std::optional<double> phi1, phi2;      // gen-solve
  ShooterOptions shooter;
  double max_step = 0.1;                 // continuation step
  int plane_samples = 100;
  std::uint64_t curvature_seed = 1;
  double validation_tolerance = 1e-4;
  unsigned workers = 0;                  // 0: hardware concurrency
  std::string output_dir = "cce_out";
};

/// Overlays the keys of a JSON object document onto cfg. Unknown keys, type
/// mismatches and syntax errors throw ConfigError("path:line: reason").
void apply_config_file(const std::string& path, RunConfig& cfg);

/// Same for an in-memory document; origin is used in messages.
void apply_config_text(const std::string& text, const std::string& origin, RunConfig& cfg);

/// Throws ConfigError on missing or invalid parameters; returns warnings
/// (squashing outside (1/4, 4), where uniqueness is not asserted).
std::vector<std::string> validate_config(const RunConfig& cfg);

/// phi0 grid from, from + step, ... up to to (inclusive within 1e-9 step),
/// values rounded to 12 decimals.
std::vector<double> scan_grid(double from, double to, double step);

/// Executes cfg.mode. Files: solve -> profile.csv, summary.json; scan ->
/// scan.csv, summary.json; probe -> summary.json; curvature -> summary.json;
/// gen-solve -> gen_profile.csv, summary.json; validate-profile ->
/// validation.json. Returns kExitOk, kExitConvergence (a solve failed) or
/// kExitValidation (bad configuration or input); progress goes to log.
int run(const RunConfig& cfg, std::ostream& log);

}  // namespace cce
