#pragma once

// Independent solver for the Berger boundary value problem: spectral-element
// collocation on [eps, 1-eps]. Each element carries (y1, y2) at its
// Chebyshev-Lobatto nodes; the algebraic y1' relation holds at every node but
// the first, the y2 equation at the interior nodes, (y1, y2, y2') are
// continuous across elements, and the endpoint jets close the system together
// with the unknowns (K0, a, q). No ODE integration is involved.

#include <Eigen/Dense>
#include <vector>

#include "cce/shooter.hpp"

namespace cce {

struct CollocationOptions {
  // Endpoint offset. The nonlocal coefficient enters the closure at x = eps
  // only through eps^2 terms of y2', so a larger offset than the shooter's
  // keeps a well determined; the order-8 jets are still exact to round-off.
  double eps = 1e-2;
  int jet_order = kDefaultJetOrder;
  double tol = 1e-10;      // sup-norm of the stacked residuals
  int max_iter = 60;
  double max_step = 0.25;  // phi0 continuation step from the hyperbolic point
  double fd_step = 1e-7;
};

/// Chebyshev-Lobatto nodes on [-1, 1] in increasing order.
std::vector<double> lobatto_nodes(int degree);

/// Differentiation matrix for the given nodes (barycentric form).
Eigen::MatrixXd differentiation_matrix(const std::vector<double>& nodes);

/// Element breakpoints on [eps, 1-eps], cosine graded toward both ends.
std::vector<double> element_breaks(int elements, double eps);

/// Solves for phi0 with degree >= 8 polynomials on grid_size elements.
/// The returned profile holds the node values (element index as segment);
/// oracle_defect is the final residual norm. Throws ConvergenceError.
BvpSolution collocation_oracle(double phi0, int degree, int grid_size,
                               const CollocationOptions& opt = {});

}  // namespace cce
