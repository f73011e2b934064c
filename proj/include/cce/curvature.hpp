#pragma once

// Curvature of the 4-metric g = dr^2 + sinh^2(r) hbar(x(r)), x = e^(-r),
// hbar = diag(I1, I2, I3) in the invariant coframe. Computed in the
// orthonormal frame e0 = d/dr, e_i = X_i / f_i with f_i = sinh(r) sqrt(I_i),
// connection coefficients from the Koszul formula.

#include <array>
#include <cstdint>
#include <utility>
#include <vector>

#include "cce/berger_flow.hpp"
#include "cce/invariant_geometry.hpp"

namespace cce {

/// Warping functions and their r-derivatives at one radius; v = f'/f and
/// dv = (f'/f)' are kept separately to avoid cancellation near the center.
struct FrameSample {
  double r = 0.0;
  std::array<double, 3> f{}, fp{}, fpp{};
  std::array<double, 3> v{}, dv{};
};

struct MetricProfile4D {
  std::vector<FrameSample> samples;  // increasing r
};

using Riemann4 = std::array<std::array<std::array<std::array<double, 4>, 4>, 4>, 4>;

/// R[a][b][c][d] = <R(e_a, e_b) e_c, e_d> with R(X,Y) = [nabla_X, nabla_Y] -
/// nabla_[X,Y], and Ric[b][c] = sum_a R[a][b][c][a].
struct FrameCurvature {
  Riemann4 R{};
  Eigen::Matrix4d Ric = Eigen::Matrix4d::Zero();
};

/// Samples with r >= r_min (closer to the center the frame quantities lose
/// digits to cancellation). The profile's recorded derivatives are used:
/// f'/f = coth r + L', f''/f = 1 + 2 coth(r) L' + L'' + L'^2 with L = log(I)/2,
/// d/dr = -x d/dx.
MetricProfile4D assemble(const SolutionProfile& p, double r_min = 1e-3);

/// Frame curvature at one radius; the frame bracket is [X_i, X_j] = -T_ij^k X_k.
FrameCurvature frame_curvature(const FrameSample& s,
                               const StructureConstants& sc = su2_structure());

/// Sectional curvature of the plane spanned by u, v (any basis of the plane).
double sectional_curvature(const Riemann4& R, const Eigen::Vector4d& u, const Eigen::Vector4d& v);

/// sup over samples of max |Ric_ab + 3 delta_ab|.
double einstein_residual_4d(const MetricProfile4D& m);

/// Extremes over the six frame planes and plane_samples random planes per
/// sample (Gaussian pairs, Gram-Schmidt, seeded); plane_samples >= 100.
std::pair<double, double> sectional_range(const MetricProfile4D& m, int plane_samples,
                                          std::uint64_t seed = 1);

struct CurvatureReport {
  double einstein_residual = 0.0;
  double sec_min = 0.0, sec_max = 0.0;  // sampled range
  bool flag_nonpositive = false;        // advisory: sec_max <= 0
  double r_min = 0.0, r_max = 0.0;
  int grid_points = 0;
  double frame_plane_deviation_far = 0.0;  // max |K(e_a,e_b) + 1| at the largest r
};

CurvatureReport curvature_report(const SolutionProfile& p, int plane_samples = 100,
                                 std::uint64_t seed = 1, double r_min = 1e-3);

}  // namespace cce
