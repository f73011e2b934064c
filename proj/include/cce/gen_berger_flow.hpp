#pragma once

// Generalized Berger system (three distinct eigenvalues) on x in (0,1) in
// y1 = log K, y2 = log phi1, y3 = log phi2 with phi1 = I2/I1, phi2 = I3/I2,
// w2 = y2', w3 = y3'. As in the Berger case y1' comes from the first-order
// constraint (minus branch) and y2'', y3'' from the evolution equations.

#include <array>
#include <vector>

#include "cce/berger_flow.hpp"
#include "cce/boundary_jets.hpp"

namespace cce {

struct GenBergerState {
  double x = 0.5;
  double y1 = 0.0, y2 = 0.0, y3 = 0.0;
  double w2 = 0.0, w3 = 0.0;
};

struct GenBergerDerivs {
  double dy1 = 0.0, dy2 = 0.0, dy3 = 0.0;
  double dw2 = 0.0, dw3 = 0.0;
};

/// Conformal-infinity data. The third-order coefficient is
/// g^(3) = diag(g11, a2, a2 + a3) with g11 fixed by tr_ghat g^(3) = 0
/// (ghat proportional to diag(I1, I2, I3)(0)); phi2_0 = 1, a3 = 0 is the
/// Berger data (phi1_0, K0, a = a2).
struct GenBergerBoundaryData {
  double phi1_0 = 1.0;
  double phi2_0 = 1.0;
  double K0 = 1.0;
  double a2 = 0.0;
  double a3 = 0.0;
};

/// I1, I2, I3 from (y1, y2, y3).
std::array<double, 3> gen_eigenvalues(double y1, double y2, double y3);

/// Bracketed curvature combination
/// 3 - 2K^-1/3 [(phi1^2 phi2)^1/3 + (phi2/phi1)^1/3 + (phi1 phi2^2)^-1/3]
///   + K^-1/3 [phi1^-4/3 phi2^-2/3 + phi1^2/3 phi2^-2/3 + phi1^2/3 phi2^4/3],
/// evaluated without cancellation near the round point.
double gen_curvature_term(double y1, double y2, double y3);

/// Sources of the y2 and y3 equations (the K^-1/3 [...] brackets).
double gen_source2(double y1, double y2, double y3);
double gen_source3(double y1, double y2, double y3);

/// (1+x^2)^2 + x^2 (1-x^2)^2 Q/36 - (4/3) x^2 B with Q = w2^2 + w2 w3 + w3^2.
double gen_branch_radicand(double x, double y1, double y2, double y3, double w2, double w3);

/// Minus-branch root of the constraint, rationalized; throws
/// BranchDomainError on a negative radicand (tiny negatives clamp to 0).
double y1prime_algebraic_gen(double x, double y1, double y2, double y3, double w2, double w3);

GenBergerDerivs gen_rhs(const GenBergerState& s);

/// y1'' from the first equation given y1', y2', y3'.
double gen_y1_second_derivative(double x, double dy1, double w2, double w3);

/// Constraint (fifth equation) for explicit y1'.
double gen_constraint_phi(double x, double y1, double dy1, double y2, double y3, double w2,
                          double w3);

/// The five equations for explicit 2-jets; the fifth equals
/// -3 (first - second) identically.
std::array<double, 5> residuals_gen(double x, double y1, double dy1, double d2y1, double y2,
                                    double dy2, double d2y2, double y3, double dy3, double d2y3);

/// Trace-free g^(3) diagonal (g11, g22, g33) for the data.
std::array<double, 3> gen_g3_diagonal(const GenBergerBoundaryData& bd);

/// Leading-balance second derivatives at x = 0: 32 K0^-1/3 [...] of the
/// y2 and y3 equations.
double gen_y2_second_derivative_at_boundary(double phi1_0, double phi2_0, double K0);
double gen_y3_second_derivative_at_boundary(double phi1_0, double phi2_0, double K0);

/// Throws DomainError unless phi1_0, phi2_0 > 0, 0 < K0 <= 1 and the
/// curvature combination at x = 0 is positive (the round data with K0 = 1
/// is admitted).
void validate_gen_boundary_data(const GenBergerBoundaryData& bd);

/// Boundary jets of (y1, y2, y3) through x^order. The y2 and y3 recursions
/// resonate at order 3, where the coefficients are 4 (g22/I2 - g11/I1) and
/// 4 (g33/I3 - g22/I2).
Jet gen_boundary_jet(const GenBergerBoundaryData& bd, int order = kDefaultJetOrder);
Jet gen_boundary_jet_unchecked(const GenBergerBoundaryData& bd, int order);

/// Center jets in s = 1 - x with y2 = (q2/2) s^2 + O(s^3),
/// y3 = (q3/2) s^2 + O(s^3), y1 = O(s^4).
Jet gen_center_jet(double q2, double q3, int order = kDefaultJetOrder);

/// Multiplied-through equations as series in the local variable:
/// r1 = x(1-x^2) E01, r2 = x(1-x^2)^2 E02, r3 = x(1-x^2)^2 E03,
/// r4 = x(1-x^2)^2 E04.
struct GenSeriesResiduals {
  series::Series r1, r2, r3, r4;
};
GenSeriesResiduals gen_series_residuals(const Jet& j);

struct GenProfileSample {
  double x = 0, y1 = 0, y2 = 0, y3 = 0, w2 = 0, w3 = 0;
  double dy1 = 0, dw2 = 0, dw3 = 0, d2y1 = 0;
  int segment = 0;
};

GenProfileSample gen_make_sample(const GenBergerState& s, int segment);

struct GenSegment {
  std::vector<GenProfileSample> samples;  // in the order of integration
  GenBergerState end;
  double max_abs_phi = 0.0;
  long steps = 0;
};

/// Integrates the reduced generalized system (same options and sampling as
/// the Berger integrator).
GenSegment gen_integrate(const GenBergerState& start, double x_end, const FlowOptions& opt = {},
                         int segment_id = 0);

}  // namespace cce
