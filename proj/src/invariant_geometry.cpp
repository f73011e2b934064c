#include "cce/invariant_geometry.hpp"

#include <cmath>

#include "cce/errors.hpp"

namespace cce {

double levi_civita(int i, int j, int k) {
  const int s = (i - j) * (j - k) * (k - i);
  return s > 0 ? 1.0 : (s < 0 ? -1.0 : 0.0);
}

StructureConstants su2_structure() {
  StructureConstants s;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) {
        s.eps[i][j][k] = levi_civita(i, j, k);
        s.C[i][j][k] = levi_civita(j, i, k);
      }
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) s.T[i][j][k] = s.C[i][j][k] - s.C[j][i][k];
  return s;
}

std::array<Table3, 3> structure_derivative(const StructureConstants& s) {
  std::array<Table3, 3> dT{};
  for (int m = 0; m < 3; ++m)
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        for (int p = 0; p < 3; ++p) {
          double v = 0.0;
          for (int q = 0; q < 3; ++q)
            v += 2.0 * s.eps[q][j][p] * s.C[i][m][q] +
                 2.0 * s.eps[i][q][p] * s.C[j][m][q] -
                 2.0 * s.eps[i][j][q] * s.C[q][m][p];
          dT[m][i][j][p] = v;
        }
  return dT;
}

void require_positive_definite(const Eigen::Matrix3d& h) {
  if (!h.allFinite()) throw DomainError("metric has non-finite entries");
  const double scale = h.cwiseAbs().maxCoeff();
  if (!(scale > 0.0)) throw DomainError("metric is zero");
  if ((h - h.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw DomainError("metric is not symmetric");
  const Eigen::Matrix3d u = h / scale;
  const double m1 = u(0, 0);
  const double m2 = u(0, 0) * u(1, 1) - u(0, 1) * u(1, 0);
  const double m3 = u.determinant();
  if (m1 <= 1e-14 || m2 <= 1e-14 || m3 <= 1e-14)
    throw DomainError("metric is not positive definite");
}

Eigen::Matrix3d inverse3(const Eigen::Matrix3d& h) {
  Eigen::Matrix3d cof;
  cof(0, 0) = h(1, 1) * h(2, 2) - h(1, 2) * h(2, 1);
  cof(0, 1) = h(1, 2) * h(2, 0) - h(1, 0) * h(2, 2);
  cof(0, 2) = h(1, 0) * h(2, 1) - h(1, 1) * h(2, 0);
  cof(1, 0) = h(0, 2) * h(2, 1) - h(0, 1) * h(2, 2);
  cof(1, 1) = h(0, 0) * h(2, 2) - h(0, 2) * h(2, 0);
  cof(1, 2) = h(0, 1) * h(2, 0) - h(0, 0) * h(2, 1);
  cof(2, 0) = h(0, 1) * h(1, 2) - h(0, 2) * h(1, 1);
  cof(2, 1) = h(0, 2) * h(1, 0) - h(0, 0) * h(1, 2);
  cof(2, 2) = h(0, 0) * h(1, 1) - h(0, 1) * h(1, 0);
  const double det = h(0, 0) * cof(0, 0) + h(0, 1) * cof(0, 1) + h(0, 2) * cof(0, 2);
  if (det == 0.0) throw DomainError("singular metric");
  return cof.transpose() / det;
}

Eigen::Matrix3d ricci_invariant(const Eigen::Matrix3d& g,
                                const StructureConstants& s) {
  require_positive_definite(g);
  const Eigen::Matrix3d gi = inverse3(g);
  const auto dT = structure_derivative(s);
  const Table3& C = s.C;
  const Table3& T = s.T;

  // X[i][p][q][m] = d_p T_iq^m + C_ip^k T_kq^m + C_pq^k T_ik^m - C_pk^m T_iq^k
  double X[3][3][3][3];
  for (int i = 0; i < 3; ++i)
    for (int p = 0; p < 3; ++p)
      for (int q = 0; q < 3; ++q)
        for (int m = 0; m < 3; ++m) {
          double v = dT[p][i][q][m];
          for (int k = 0; k < 3; ++k)
            v += C[i][p][k] * T[k][q][m] + C[p][q][k] * T[i][k][m] -
                 C[p][k][m] * T[i][q][k];
          X[i][p][q][m] = v;
        }

  // A[i][j] = g^{pq} X_ipq^m g_mj  (the second bracket of the formula)
  Eigen::Matrix3d A = Eigen::Matrix3d::Zero();
  // P[i][j] = g^{pq} T_pi^k T_kq^m g_mj
  Eigen::Matrix3d P = Eigen::Matrix3d::Zero();
  // Q[i][j] = g^{kq} T_pk^p T_iq^m g_mj
  Eigen::Matrix3d Q = Eigen::Matrix3d::Zero();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int p = 0; p < 3; ++p)
        for (int q = 0; q < 3; ++q)
          for (int m = 0; m < 3; ++m) {
            A(i, j) += gi(p, q) * X[i][p][q][m] * g(m, j);
            double tt = 0.0, tr = 0.0;
            for (int k = 0; k < 3; ++k) {
              tt += T[p][i][k] * T[k][q][m];
              tr += T[k][p][k];
            }
            P(i, j) += gi(p, q) * tt * g(m, j);
            Q(i, j) += gi(p, q) * tr * T[i][q][m] * g(m, j);
          }

  Eigen::Matrix3d R = Eigen::Matrix3d::Zero();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double t1 = 0.0, t4 = 0.0, t9 = 0.0, t10 = 0.0;
      for (int p = 0; p < 3; ++p) {
        t1 += dT[p][i][j][p];
        for (int k = 0; k < 3; ++k) {
          t1 += C[i][p][k] * T[k][j][p] + C[k][j][p] * T[i][p][k] +
                C[k][p][p] * T[j][i][k];
          t4 += T[p][i][k] * T[k][j][p];
          for (int q = 0; q < 3; ++q)
            for (int m = 0; m < 3; ++m) {
              t9 += gi(p, q) * T[p][j][k] * T[i][q][m] * g(k, m);
              t10 += gi(p, q) * T[p][i][k] * T[j][q][m] * g(k, m);
            }
        }
      }
      // Last quadratic term: -1/4 g^{pl} U_jlk g^{kq} V_ipq with
      // U_jlk = T_jl^m g_mk + T_kl^m g_mj, V_ipq = T_pq^m g_mi + T_iq^m g_mp.
      double t11 = 0.0;
      for (int p = 0; p < 3; ++p)
        for (int l = 0; l < 3; ++l)
          for (int k = 0; k < 3; ++k)
            for (int q = 0; q < 3; ++q) {
              double U = 0.0, V = 0.0;
              for (int m = 0; m < 3; ++m) {
                U += T[j][l][m] * g(m, k) + T[k][l][m] * g(m, j);
                V += T[p][q][m] * g(m, i) + T[i][q][m] * g(m, p);
              }
              t11 += gi(p, l) * U * gi(k, q) * V;
            }
      R(i, j) = 0.5 * t1 - 0.5 * A(i, j) - 0.5 * A(j, i) + 0.25 * t4 -
                0.25 * P(i, j) - 0.25 * P(j, i) - 0.5 * Q(i, j) - 0.5 * Q(j, i) +
                0.25 * t9 + 0.25 * t10 - 0.25 * t11;
    }
  return R;
}

Eigen::Vector3d berger_ricci_diagonal(double I1, double I2, double I3) {
  if (!(I1 > 0.0 && I2 > 0.0 && I3 > 0.0))
    throw DomainError("diagonal metric entries must be positive");
  return {4.0 - 2.0 * (I2 / I3 + I3 / I2) + 2.0 * I1 * I1 / (I2 * I3),
          4.0 - 2.0 * (I3 / I1 + I1 / I3) + 2.0 * I2 * I2 / (I1 * I3),
          4.0 - 2.0 * (I2 / I1 + I1 / I2) + 2.0 * I3 * I3 / (I1 * I2)};
}

GeneralResiduals general_einstein_residuals(double x, const Eigen::Matrix3d& h,
                                            const Eigen::Matrix3d& hp,
                                            const Eigen::Matrix3d& hpp,
                                            const StructureConstants& s) {
  if (!(x > 0.0 && x < 1.0)) throw DomainError("x must lie in (0,1)");
  require_positive_definite(h);
  constexpr double n = 3.0;
  const Eigen::Matrix3d gi = inverse3(h);
  const Eigen::Matrix3d M = gi * hp;
  const double tau = M.trace();
  const double tau2 = (M * M).trace();
  const double dtau = (gi * hpp).trace() - tau2;
  const double om = 1.0 - x * x;

  GeneralResiduals r;
  r.scalar = (1.0 - 3.0 * x * x) * tau + x * om * dtau + 0.5 * x * om * tau2 -
             2.0 * tau;

  const Table3& C = s.C;
  for (int i = 0; i < 3; ++i) {
    double v = 0.0;
    for (int p = 0; p < 3; ++p)
      for (int q = 0; q < 3; ++q)
        for (int k = 0; k < 3; ++k) {
          v += C[p][q][p] * gi(q, k) * hp(k, i);
          v += C[i][q][k] * gi(p, q) * hp(k, p);
          v -= C[q][p][p] * gi(q, k) * hp(k, i);
          v -= C[p][i][k] * gi(p, q) * hp(k, q);
        }
    r.vector(i) = v;
  }

  const Eigen::Matrix3d Ric = ricci_invariant(h, s);
  const Eigen::Matrix3d quad = hp.transpose() * gi * hp;
  r.tensor = -0.125 * x * om * om * hpp +
             0.125 * ((n - 1.0) + (1.0 + n) * x * x) * om * hp +
             0.125 * x * om * om * quad + 0.125 * (1.0 + x * x) * om * tau * h -
             0.0625 * x * om * om * tau * hp + (1.0 - n) * x * h + x * Ric;
  return r;
}

}  // namespace cce
