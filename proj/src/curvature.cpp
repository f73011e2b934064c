#include "cce/curvature.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "cce/errors.hpp"

namespace cce {

MetricProfile4D assemble(const SolutionProfile& p, double r_min) {
  MetricProfile4D m;
  for (auto it = p.samples.rbegin(); it != p.samples.rend(); ++it) {
    const ProfileSample& s = *it;
    if (!(s.x > 0.0 && s.x < 1.0)) throw DomainError("profile sample outside (0,1)");
    const double r = -std::log(s.x);
    if (r < r_min) continue;
    const double x = s.x;
    // log I_i and x-derivatives: l1 = (y1 - 2 y2)/3, l2 = l3 = (y1 + y2)/3
    const double l[3] = {(s.y1 - 2 * s.y2) / 3, (s.y1 + s.y2) / 3, (s.y1 + s.y2) / 3};
    const double lx[3] = {(s.dy1 - 2 * s.w) / 3, (s.dy1 + s.w) / 3, (s.dy1 + s.w) / 3};
    const double lxx[3] = {(s.d2y1 - 2 * s.dw) / 3, (s.d2y1 + s.dw) / 3, (s.d2y1 + s.dw) / 3};
    FrameSample f;
    f.r = r;
    const double sh = std::sinh(r), coth = 1.0 / std::tanh(r);
    for (int i = 0; i < 3; ++i) {
      const double Lp = -0.5 * x * lx[i];
      const double Lpp = 0.5 * (x * lx[i] + x * x * lxx[i]);
      f.f[i] = sh * std::exp(0.5 * l[i]);
      f.v[i] = coth + Lp;
      f.dv[i] = Lpp - 1.0 / (sh * sh);
      f.fp[i] = f.f[i] * f.v[i];
      f.fpp[i] = f.f[i] * (1.0 + 2.0 * coth * Lp + Lpp + Lp * Lp);
    }
    if (!m.samples.empty() && !(f.r > m.samples.back().r))
      throw DomainError("profile x must be strictly increasing");
    m.samples.push_back(f);
  }
  return m;
}

FrameCurvature frame_curvature(const FrameSample& s, const StructureConstants& sc) {
  using T3 = std::array<std::array<std::array<double, 4>, 4>, 4>;
  // [e_a, e_b] = c[a][b][k] e_k and its r-derivative
  T3 c{}, dc{};
  for (int i = 0; i < 3; ++i) {
    const double v = s.v[i];
    const double dv = s.dv[i];
    c[0][i + 1][i + 1] = -v;
    c[i + 1][0][i + 1] = v;
    dc[0][i + 1][i + 1] = -dv;
    dc[i + 1][0][i + 1] = dv;
  }
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) {
        const double b = -sc.T[i][j][k];
        if (b == 0.0) continue;
        const double val = b * s.f[k] / (s.f[i] * s.f[j]);
        c[i + 1][j + 1][k + 1] = val;
        dc[i + 1][j + 1][k + 1] =
            val * (s.v[k] - s.v[i] - s.v[j]);
      }
  // nabla_{e_a} e_b = G[a][b][c] e_c (Koszul, orthonormal frame)
  T3 G{}, dG{};
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      for (int d = 0; d < 4; ++d) {
        G[a][b][d] = 0.5 * (c[a][b][d] - c[b][d][a] + c[d][a][b]);
        dG[a][b][d] = 0.5 * (dc[a][b][d] - dc[b][d][a] + dc[d][a][b]);
      }
  // only e0 = d/dr differentiates the (r-dependent) coefficients
  FrameCurvature out;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      for (int e = 0; e < 4; ++e)
        for (int d = 0; d < 4; ++d) {
          double v = 0.0;
          if (a == 0) v += dG[b][e][d];
          if (b == 0) v -= dG[a][e][d];
          for (int k = 0; k < 4; ++k) {
            v += G[b][e][k] * G[a][k][d];
            v -= G[a][e][k] * G[b][k][d];
            v -= c[a][b][k] * G[k][e][d];
          }
          out.R[a][b][e][d] = v;
        }
  for (int b = 0; b < 4; ++b)
    for (int e = 0; e < 4; ++e) {
      double v = 0.0;
      for (int a = 0; a < 4; ++a) v += out.R[a][b][e][a];
      out.Ric(b, e) = v;
    }
  return out;
}

double sectional_curvature(const Riemann4& R, const Eigen::Vector4d& u0, const Eigen::Vector4d& v0) {
  const Eigen::Vector4d u = u0.normalized();
  Eigen::Vector4d v = v0 - v0.dot(u) * u;
  const double nv = v.norm();
  if (!(nv > 1e-12 * v0.norm())) throw DomainError("degenerate plane");
  v /= nv;
  double k = 0.0;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      for (int c = 0; c < 4; ++c)
        for (int d = 0; d < 4; ++d) k += R[a][b][c][d] * u(a) * v(b) * v(c) * u(d);
  return k;
}

double einstein_residual_4d(const MetricProfile4D& m) {
  double res = 0.0;
  for (const FrameSample& s : m.samples) {
    const FrameCurvature fc = frame_curvature(s);
    res = std::max(res, (fc.Ric + 3.0 * Eigen::Matrix4d::Identity()).cwiseAbs().maxCoeff());
  }
  return res;
}

std::pair<double, double> sectional_range(const MetricProfile4D& m, int plane_samples,
                                          std::uint64_t seed) {
  if (plane_samples < 100) throw DomainError("sectional_range needs at least 100 random planes");
  double lo = INFINITY, hi = -INFINITY;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> N(0.0, 1.0);
  for (const FrameSample& s : m.samples) {
    const FrameCurvature fc = frame_curvature(s);
    for (int a = 0; a < 4; ++a)
      for (int b = a + 1; b < 4; ++b) {
        const double k = sectional_curvature(fc.R, Eigen::Vector4d::Unit(a), Eigen::Vector4d::Unit(b));
        lo = std::min(lo, k);
        hi = std::max(hi, k);
      }
    for (int t = 0; t < plane_samples; ++t) {
      Eigen::Vector4d u, v;
      for (int i = 0; i < 4; ++i) u(i) = N(rng);
      for (int i = 0; i < 4; ++i) v(i) = N(rng);
      const double k = sectional_curvature(fc.R, u, v);
      lo = std::min(lo, k);
      hi = std::max(hi, k);
    }
  }
  return {lo, hi};
}

CurvatureReport curvature_report(const SolutionProfile& p, int plane_samples,
                                 std::uint64_t seed, double r_min) {
  const MetricProfile4D m = assemble(p, r_min);
  if (m.samples.empty()) throw DomainError("no profile samples beyond r_min");
  CurvatureReport rep;
  rep.grid_points = static_cast<int>(m.samples.size());
  rep.r_min = m.samples.front().r;
  rep.r_max = m.samples.back().r;
  rep.einstein_residual = einstein_residual_4d(m);
  const auto range = sectional_range(m, plane_samples, seed);
  rep.sec_min = range.first;
  rep.sec_max = range.second;
  rep.flag_nonpositive = rep.sec_max <= 0.0;
  const FrameCurvature far = frame_curvature(m.samples.back());
  for (int a = 0; a < 4; ++a)
    for (int b = a + 1; b < 4; ++b)
      rep.frame_plane_deviation_far = std::max(
          rep.frame_plane_deviation_far,
          std::fabs(sectional_curvature(far.R, Eigen::Vector4d::Unit(a), Eigen::Vector4d::Unit(b)) + 1.0));
  return rep;
}

}  // namespace cce
