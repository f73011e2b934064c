#pragma once

// CSV exchange of solution profiles and validation of externally supplied
// (x, I1, I2) tables. Numbers are written with 17 significant digits so that
// values survive the round trip bit for bit.

#include <array>
#include <string>
#include <vector>

#include "cce/berger_flow.hpp"
#include "cce/curvature.hpp"
#include "cce/gen_shooter.hpp"

namespace cce {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
  std::vector<int> lines;  // source line of each row (1-based)

  /// Column index; throws DomainError when absent.
  int column(const std::string& name) const;
  std::vector<double> values(const std::string& name) const;
};

/// Comma-separated, first line is the header; throws DomainError with
/// "path:line: reason" on malformed input.
CsvTable read_csv(const std::string& path);

std::string format_double(double v);

/// Columns: x, r, y1, y2, dy2, K, phi, I1, I2, Phi, res1..res4 (Phi from the
/// recorded y1', residuals from finite differences within each leg).
void write_profile_csv(const std::string& path, const SolutionProfile& p);

/// Columns: x, r, y1, y2, y3, dy2, dy3, K, phi1, phi2, I1, I2, I3, Phi,
/// res1..res5 for the generalized system (phi1 = I2/I1, phi2 = I3/I2).
void write_gen_profile_csv(const std::string& path, const GenSolutionProfile& p);

/// Rebuilds a profile from x, y1, y2, dy2; y1', y2'' and y1'' are taken from
/// the reduced system (the data are treated as samples of a trajectory);
/// phi0 and K0 are extrapolated from the first sample.
SolutionProfile read_profile_csv(const std::string& path);

/// Profile from an eigenvalue table: y1 = log(I1 I2^2), y2 = log(I2/I1), all
/// derivatives by finite differences, one segment. x strictly increasing in
/// (0,1), at least 7 rows.
SolutionProfile profile_from_table(const std::vector<double>& x, const std::vector<double>& I1,
                                   const std::vector<double>& I2);

struct ProfileValidation {
  int samples = 0;
  std::array<double, 4> max_residuals{};  // per equation, sup over samples
  double max_residual = 0.0;
  double einstein_residual = 0.0;
  double sec_min = 0.0, sec_max = 0.0;
  double tolerance = 0.0;
  bool einstein = false;  // max_residual and einstein_residual below tolerance
};

constexpr double kValidationTolerance = 1e-4;

ProfileValidation validate_table(const std::vector<double>& x, const std::vector<double>& I1,
                                 const std::vector<double>& I2,
                                 double tolerance = kValidationTolerance,
                                 int plane_samples = 100, std::uint64_t seed = 1);

/// Reads x, I1, I2 (further columns are ignored) and validates.
ProfileValidation validate_profile(const std::string& path,
                                   double tolerance = kValidationTolerance,
                                   int plane_samples = 100, std::uint64_t seed = 1);

}  // namespace cce
