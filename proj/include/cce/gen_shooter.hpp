#pragma once

// Double shooting for the generalized Berger boundary value problem: Newton
// on (K0, a2, a3, q2, q3) matches (y1, y2, y3, y2', y3') at x_match. No
// uniqueness claim is attached to solutions of this system.

#include <Eigen/Dense>
#include <array>
#include <vector>

#include "cce/gen_berger_flow.hpp"
#include "cce/shooter.hpp"

namespace cce {

using Vector5d = Eigen::Matrix<double, 5, 1>;

struct GenShootingParams {
  double K0 = 1.0;
  double a2 = 0.0, a3 = 0.0;
  double q2 = 0.0, q3 = 0.0;

  Vector5d vec() const;
  static GenShootingParams from(const Vector5d& v);
};

struct GenSolutionProfile {
  std::vector<GenProfileSample> samples;  // strictly increasing x
  GenBergerBoundaryData bd;
  double q2 = 0.0, q3 = 0.0;
  double eps = 1e-4;
  double max_abs_phi = 0.0;
};

struct GenBvpSolution {
  double phi1_0 = 1.0, phi2_0 = 1.0;
  GenShootingParams params;
  GenSolutionProfile profile;
  double match_defect = 0.0;
  int iterations = 0;
};

/// Forward minus backward state at opt.x_match; penalty encoded (kPenalty)
/// on branch or integration failure.
Vector5d gen_shooting_residual(double phi1_0, double phi2_0, const GenShootingParams& p,
                               const ShooterOptions& opt = {});
bool is_penalty(const Vector5d& r);

GenSolutionProfile gen_shooting_profile(double phi1_0, double phi2_0, const GenShootingParams& p,
                                        const ShooterOptions& opt = {});

/// Damped Newton from guess; throws ConvergenceError.
GenBvpSolution gen_solve(double phi1_0, double phi2_0, const GenShootingParams& guess,
                         const ShooterOptions& opt = {});

/// Continuation from the hyperbolic point along phi_i(t) = phi_i^t, each
/// step changing max |log phi_i| by at most max_step.
GenBvpSolution gen_solve_continued(double phi1_0, double phi2_0, const ShooterOptions& opt = {},
                                   double max_step = 0.1);

struct GenDiagnostics {
  int samples = 0;
  double max_abs_phi = 0.0;           // constraint monitor
  double max_residual = 0.0;          // five equations, finite-difference jets
  double max_closure_residual = 0.0;  // five equations, recorded derivatives
  double max_abs_y3 = 0.0;
};

/// Residuals of the five equations at every sample, derivatives by finite
/// differences within each segment (NaN where a segment has < 7 samples).
std::vector<std::array<double, 5>> gen_fd_residuals(const GenSolutionProfile& p);

GenDiagnostics gen_diagnostics(const GenSolutionProfile& p);

}  // namespace cce
