#pragma once

// Reduced Berger system on x in (0,1) in the variables y1 = log K,
// y2 = log phi, w = y2'. y1' is recovered algebraically from the first-order
// constraint (minus branch), y2'' from the y2 evolution equation.

#include <array>
#include <cmath>
#include <vector>

#include "cce/boundary_jets.hpp"
#include "cce/integrator.hpp"

namespace cce {

struct BergerState {
  double x = 0.5;
  double y1 = 0.0;
  double y2 = 0.0;
  double w = 0.0;
};

struct BergerDerivs {
  double dy1 = 0.0;
  double dy2 = 0.0;
  double dw = 0.0;
};

/// Curvature combination 3 - 4(K phi)^(-1/3) + K^(-1/3) phi^(-4/3) in log
/// variables, evaluated without cancellation near the round point.
double curvature_term(double y1, double y2);

/// Argument of the square root in the y1' branch:
/// (1-x^2)^2 + x^2(1-x^2)^2 w^2/36 + (4/3) x^2 K^(-1/3) phi^(-4/3) (4 phi - 1).
double branch_radicand(double x, double y1, double y2, double w);

/// y1' = 6 x^-1 (1-x^2)^-1 [1 + x^2 - sqrt(radicand)], computed in the
/// rationalized form. Radicands in (-1e-13, 0) are clamped to 0; more
/// negative values throw BranchDomainError.
double y1prime_algebraic(double x, double y1, double y2, double w);

/// Right-hand side (y1', y2', w') of the reduced system.
BergerDerivs rhs(const BergerState& s);

/// y1'' along the flow: exact x-derivative of the algebraic branch (implicit
/// differentiation of the constraint), given y1' and w'.
double y1_second_derivative(double x, double y1, double y2, double w,
                            double dy1, double dw);

/// Constraint function Phi (the combined first-order equation) for explicit
/// y1'.
double constraint_phi(double x, double y1, double dy1, double y2, double w);
/// Phi with y1' taken from the algebraic branch.
double constraint_phi(const BergerState& s);

/// Residuals of the four Berger equations (01, 02, 03 and the combined
/// first-order constraint 04) for explicit 2-jets.
std::array<double, 4> full_residuals(double x, double y1, double dy1, double d2y1,
                                     double y2, double dy2, double d2y2);

/// exp(v) - 1 without cancellation for small |v| in any floating type.
template <class T>
T expm1_generic(const T& v) {
  using std::abs;
  using std::exp;
  if (abs(v) < T(0.25)) {
    T term = v, sum = v;
    for (int k = 2; k < 48; ++k) {
      term *= v / T(k);
      sum += term;
    }
    return sum;
  }
  return exp(v) - T(1);
}
inline double expm1_generic(double v) { return std::expm1(v); }

/// Scalar-generic form of full_residuals.
template <class T>
std::array<T, 4> full_residuals_t(const T& x, const T& y1, const T& dy1, const T& d2y1,
                                  const T& y2, const T& dy2, const T& d2y2) {
  using std::exp;
  const T om = T(1) - x * x;
  const T u = -(y1 + y2) / T(3);
  const T v = -(y1 + T(4) * y2) / T(3);
  // 3 - 4 (K phi)^(-1/3) + K^(-1/3) phi^(-4/3)
  const T B = T(-4) * expm1_generic(u) + expm1_generic(v);
  std::array<T, 4> r;
  r[0] = d2y1 + dy1 * dy1 / T(6) + dy2 * dy2 / T(3) - (T(1) + T(3) * x * x) / (x * om) * dy1;
  // 6 - 8 K^(-1/3) phi^(-1/3) + 2 K^(-1/3) phi^(-4/3) = 2 B
  r[1] = d2y1 + dy1 * dy1 / T(2) - (T(5) + T(7) * x * x) / (x * om) * dy1 +
         T(8) / (om * om) * T(2) * B;
  // K^(-1/3) phi^(-1/3) (phi^-1 - 1) = e^u expm1(-y2)
  r[2] = d2y2 + dy1 * dy2 / T(2) - T(2) * (T(1) + T(2) * x * x) / (x * om) * dy2 +
         T(32) / (om * om) * exp(u) * expm1_generic(T(-y2));
  r[3] = dy1 * dy1 - dy2 * dy2 - T(12) * (T(1) + x * x) / (x * om) * dy1 +
         T(48) / (om * om) * B;
  return r;
}

/// A profile sample with derivatives recorded from the vector field at
/// integration time. segment identifies the integration leg the sample came
/// from (finite differences never straddle legs).
struct ProfileSample {
  double x = 0, y1 = 0, y2 = 0, w = 0;
  double dy1 = 0, dw = 0, d2y1 = 0;
  int segment = 0;
};

ProfileSample make_sample(double x, double y1, double y2, double w, int segment = 0);

struct SolutionProfile {
  std::vector<ProfileSample> samples;  // strictly increasing x
  BergerBoundaryData params;
  double q = 0.0;
  double eps = 1e-4;
  double max_abs_phi = 0.0;
};

struct FlowOptions {
  double rtol = 1e-10;
  double atol = 1e-12;
  int n_out = 200;
  bool graded = false;  // cosine-graded samples, dense near the start of the leg
  double h_min = 1e-14;
  long max_steps = 1000000;
};

struct Segment {
  std::vector<ProfileSample> samples;  // in the order of integration
  BergerState end;
  double max_abs_phi = 0.0;
  long steps = 0;
};

/// Map of [0,1] onto itself used for graded output, dense near 0.
double graded_fraction(double t);

/// Integrates the reduced system from start to x_end (either direction),
/// sampling n_out points (equally spaced or graded toward start) including both
/// ends.
Segment integrate(const BergerState& start, double x_end, const FlowOptions& opt = {},
                  int segment_id = 0);

/// Fixed-step integration (n_steps equal steps) returning the end state.
BergerState integrate_fixed_steps(const BergerState& start, double x_end, long n_steps);

/// Weights of the m-th derivative at z from nodes xs (Fornberg's algorithm).
std::vector<double> fornberg_weights(double z, const std::vector<double>& xs, int m);

/// First and second derivatives of sampled (x, y) data with 7-point stencils
/// on the nonuniform grid.
void finite_difference_derivatives(const std::vector<double>& x,
                                   const std::vector<double>& y,
                                   std::vector<double>& dy, std::vector<double>& d2y);

/// Residuals of the four equations at every sample with y1, y2 derivatives
/// from finite_difference_derivatives within each segment (NaN where a
/// segment has fewer than 7 samples).
std::vector<std::array<double, 4>> fd_residuals(const SolutionProfile& p);

struct DiagnosticsReport {
  int samples = 0;
  int y1p_positive_violations = 0;       // y1' > 0
  int y2p_sign_violations = 0;           // sign(y2') = sign(1 - phi0)
  int y1p_upper_violations = 0;          // y1' < 12 x (1-x^2)^-1
  int curvature_bound_violations = 0;    // B > x^2 (1-x^2)^2 w^2 / 36
  int K_violations = 0;                  // K < 1
  int phi_range_violations = 0;          // phi strictly between phi0 and 1
  int M_monotone_violations = 0;         // M = x^-1 (1-x^2)^2 y1' non-increasing
  int N_monotone_violations = 0;         // N' has the sign of (phi0 - 1)
  double max_abs_phi = 0.0;              // constraint monitor
  double max_residual = 0.0;             // four equations, finite-difference jets
  double max_closure_residual = 0.0;     // four equations, recorded derivatives
  double min_y1p = 0.0, max_y1p = 0.0;

  bool monotonicity_ok() const;
  bool bounds_ok() const;
  bool all_ok() const;
};

/// Evaluates the structural checks at every sample (violations are counted,
/// never thrown). Sign checks are vacuous for phi0 = 1.
DiagnosticsReport diagnostics(const SolutionProfile& p, double slack = 1e-9);

}  // namespace cce
