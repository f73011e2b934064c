#pragma once

// Double shooting for the Berger boundary value problem: the boundary jet at
// x = eps is integrated forward and the center jet at x = 1 - eps backward to
// a match point; Newton on (K0, a, q) drives the mismatch of (y1, y2, y2') to
// zero. Continuation in phi0 and a multi-start uniqueness probe sit on top.

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "cce/berger_flow.hpp"
#include "cce/boundary_jets.hpp"
#include "cce/errors.hpp"

namespace cce {

struct ShootingParams {
  double K0 = 1.0;
  double a = 0.0;
  double q = 0.0;

  Eigen::Vector3d vec() const { return {K0, a, q}; }
  static ShootingParams from(const Eigen::Vector3d& v) { return {v(0), v(1), v(2)}; }
};

struct ShooterOptions {
  double eps = 1e-4;                          // endpoint offsets
  int jet_order = kDefaultJetOrder;
  double x_match = 0.5;
  std::vector<double> match_stages{0.05, 0.2};  // loosely solved first, in order
  double stage_tol = 1e-6;
  double tol = 1e-9;                          // sup-norm of the match defect
  int max_iter = 100;
  double fd_step = 1e-6;                      // relative forward-difference step
  int max_halvings = 20;
  double rtol = 1e-12;                        // shooting integrator tolerances
  double atol = 1e-20;  
  int n_out = 200;                            // profile samples per leg
};

/// Match defects of branch failures: 1e6 (1 + depth) in every component.
constexpr double kPenalty = 1e6;

struct BvpSolution {
  double phi0 = 1.0;
  ShootingParams params;
  SolutionProfile profile;
  double match_defect = 0.0;
  double oracle_defect = std::numeric_limits<double>::quiet_NaN();
  int iterations = 0;
};

/// Newton failed; carries the best iterate.
class SolveError : public ConvergenceError {
 public:
  SolveError(const std::string& what, BvpSolution best)
      : ConvergenceError(what), best_(std::move(best)) {}
  const BvpSolution& best() const noexcept { return best_; }

 private:
  BvpSolution best_;
};

/// (y1, y2, y2')_forward - (y1, y2, y2')_backward at opt.x_match; penalty
/// encoded on branch-domain or integration failure (never throws).
Eigen::Vector3d shooting_residual(double phi0, const ShootingParams& p,
                                  const ShooterOptions& opt = {});

bool is_penalty(const Eigen::Vector3d& r);

/// Forward/backward profile for given parameters, legs tagged as segments 0
/// and 1, strictly increasing x. Throws on branch or integration failure.
SolutionProfile shooting_profile(double phi0, const ShootingParams& p,
                                 const ShooterOptions& opt = {});

/// Damped Newton from guess; throws SolveError on failure.
BvpSolution solve(double phi0, const ShootingParams& guess, const ShooterOptions& opt = {});

/// Solves by continuation from the hyperbolic point phi0 = 1 with steps of
/// at most max_step (halved on failure).
BvpSolution solve_continued(double phi0, const ShooterOptions& opt = {}, double max_step = 0.1);

struct ScanRow {
  double phi0 = 1.0;
  bool converged = false;
  ShootingParams params;
  double match_defect = 0.0;
  DiagnosticsReport diagnostics;
  std::string message;
};

/// Solves outward from phi0 = 1 along the grid (both sides), recording
/// failures without aborting. Rows come back in grid order.
std::vector<ScanRow> continuation_scan(const std::vector<double>& grid,
                                       const ShooterOptions& opt = {}, double max_step = 0.1);

struct ProbeStart {
  int index = 0;
  ShootingParams guess;
  bool converged = false;
  ShootingParams result;
  double match_defect = 0.0;
  int cluster = -1;
};

struct ProbeReport {
  double phi0 = 1.0;
  std::uint64_t seed = 0;
  double spread = 1.0;
  std::vector<ProbeStart> starts;            // in start order
  std::vector<ShootingParams> clusters;      // representative = first member
  std::vector<int> cluster_sizes;
  int converged = 0;
};

constexpr double kClusterRadius = 1e-6;

/// Latin-hypercube starts over K0 in the admissible interval above the
/// curvature bound, a in [-10 spread, 10 spread], q in [-2 spread, 2 spread];
/// each is solved independently (in parallel when workers != 1) and the
/// converged triples are clustered greedily in start order.
ProbeReport uniqueness_probe(double phi0, int n_starts, double spread, std::uint64_t seed,
                             const ShooterOptions& opt = {}, unsigned workers = 0);

/// Runs f(i) for i in [0, n) on up to workers threads (0: hardware count).
void parallel_for(int n, unsigned workers, const std::function<void(int)>& f);

}  // namespace cce
