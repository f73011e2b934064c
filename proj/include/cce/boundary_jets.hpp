#pragma once

// Truncated series solutions of the Berger system at its two singular
// endpoints: conformal infinity x = 0 and the center x = 1 (local variable
// s = 1 - x), and the second Fefferman-Graham coefficient g^(2).

#include <Eigen/Dense>
#include <vector>

#include "cce/series.hpp"

namespace cce {

/// Conformal-infinity data: squashing phi0 = lambda2/lambda1, relative volume
/// K0 = K(0) and the nonlocal coefficient a of g^(3) = diag(-2 a/phi0, a, a).
struct BergerBoundaryData {
  double phi0 = 1.0;
  double K0 = 1.0;
  double a = 0.0;
};

enum class Endpoint { Boundary, Center };

/// Taylor coefficients in the local variable (x at the boundary, s = 1 - x at
/// the center). y3 is empty for the Berger system.
template <class T>
struct JetT {
  Endpoint endpoint = Endpoint::Boundary;
  series::SeriesT<T> y1;
  series::SeriesT<T> y2;
  series::SeriesT<T> y3;
  int order = 0;
};
using Jet = JetT<double>;

/// Values and x-derivatives of a jet at a point.
template <class T>
struct JetValueT {
  T y1 = 0, dy1 = 0, d2y1 = 0;
  T y2 = 0, dy2 = 0, d2y2 = 0;
  T y3 = 0, dy3 = 0, d2y3 = 0;
};
using JetValue = JetValueT<double>;

constexpr double kJetTrustRadius = 0.1;
constexpr int kDefaultJetOrder = 8;

/// 3 - 4 (phi K)^(-1/3) + K^(-1/3) phi^(-4/3).
double curvature_combination(double phi, double K);

/// Smallest K0 keeping the curvature combination positive:
/// [(4 phi0^(-1/3) - phi0^(-4/3)) / 3]^3 (0 when the bracket is negative).
double k0_lower_bound(double phi0);

/// Throws DomainError unless 1/4 < phi0 < 4, 0 < K0 <= 1 and the curvature
/// combination at (phi0, K0) is positive.
void validate_boundary_data(const BergerBoundaryData& bd);

/// g^(2) = R ghat / 4 - Ric(ghat) for a positive definite boundary metric in
/// the invariant frame (n = 3).
Eigen::Matrix3d g2_from_boundary_metric(const Eigen::Matrix3d& ghat);

/// Closed forms at x = 0.
double y1_second_derivative_at_boundary(double phi0, double K0);
double y2_second_derivative_at_boundary(double phi0, double K0);
double y2_third_coefficient(double phi0, double K0, double a);
double y1_fifth_coefficient(double phi0, double K0, double a);

/// Boundary jet through x^order; validates bd.
Jet berger_boundary_jet(const BergerBoundaryData& bd, int order = kDefaultJetOrder);
/// Same recursion without validating bd (used inside nonlinear solvers where
/// iterates may leave the admissible region temporarily).
Jet berger_boundary_jet_unchecked(const BergerBoundaryData& bd, int order);

/// Center jet through s^order with y2 = (q/2) s^2 + O(s^3), y1 = O(s^4).
Jet berger_center_jet(double q, int order = kDefaultJetOrder);

/// Multiplied-through Berger equations as series in the local variable:
/// r1 = x(1-x^2) E01, r2 = x(1-x^2)^2 E02, r3 = x(1-x^2)^2 E03.
template <class T>
struct SeriesResidualsT {
  series::SeriesT<T> r1, r2, r3;
};
using SeriesResiduals = SeriesResidualsT<double>;

SeriesResiduals berger_series_residuals(const Jet& j);

/// Evaluates the jet at x; throws DomainError when the local variable exceeds
/// the trust radius.
JetValue eval_jet(const Jet& j, double x, double trust_radius = kJetTrustRadius);

// ---------------------------------------------------------------------------
// Scalar-generic recursions (double instantiations back the functions above;
// extended-precision instantiations serve convergence studies).

template <class T>
SeriesResidualsT<T> berger_series_residuals_t(const JetT<T>& j) {
  using namespace series;
  using S = SeriesT<T>;
  const int n = static_cast<int>(j.y1.size());
  const bool center = j.endpoint == Endpoint::Center;
  // x as a series in the local variable, and d/dx = sign * d/dt.
  const S X = center ? poly<T>({1.0, -1.0}, n) : poly<T>({0.0, 1.0}, n);
  const T sign = center ? T(-1) : T(1);
  const S one = constant<T>(T(1), n);
  const S X2 = mul(X, X);
  const S om = sub(one, X2);
  const S om2 = mul(om, om);

  const S d1 = scale(der(j.y1), sign);
  const S d2 = scale(der(j.y2), sign);
  const S dd1 = der(der(j.y1));
  const S dd2 = der(der(j.y2));

  const T third = T(1) / T(3);
  const S zero(n, T(0));
  const S k13p13 = exp_lin(-third, j.y1, -third, j.y2, T(0), zero);
  const S k13p43 = exp_lin(-third, j.y1, T(-4) * third, j.y2, T(0), zero);

  SeriesResidualsT<T> r;
  r.r1 = sub(mul(X, om, add(dd1, add(scale(mul(d1, d1), T(1) / T(6)),
                                     scale(mul(d2, d2), third)))),
             mul(add(one, scale(X2, T(3))), d1));
  const S curv2 = add(sub(scale(one, T(6)), scale(k13p13, T(8))), scale(k13p43, T(2)));
  r.r2 = add(sub(mul(X, om2, add(dd1, scale(mul(d1, d1), T(1) / T(2)))),
                 mul(add(scale(one, T(5)), scale(X2, T(7))), om, d1)),
             scale(mul(X, curv2), T(8)));
  r.r3 = add(sub(mul(X, om2, add(dd2, scale(mul(d1, d2), T(1) / T(2)))),
                 scale(mul(add(one, scale(X2, T(2))), om, d2), T(2))),
             scale(mul(X, sub(k13p43, k13p13)), T(32)));
  return r;
}

/// Boundary recursion. At order k the unknown coefficient enters the
/// order-(k-1) residual with indicial factors k(k-3) (r3, y2), k(k-6) (r2, y1)
/// and k(k-2) (r1, y1). The r3 resonance at k = 3 is the free coefficient
/// y2^(3) = 12 (K0 phi0)^(-1/3) a; r2 resonates at k = 6, so y1 uses r2 only
/// at k = 2 and r1 elsewhere.
template <class T>
JetT<T> berger_boundary_jet_t(const T& log_phi0, const T& log_K0, const T& a, int order) {
  using std::exp;
  const int n = order + 1;
  JetT<T> j;
  j.endpoint = Endpoint::Boundary;
  j.order = order;
  j.y1.assign(n, T(0));
  j.y2.assign(n, T(0));
  j.y1[0] = log_K0;
  j.y2[0] = log_phi0;
  for (int k = 1; k < n; ++k) {
    if (k == 3) {
      j.y2[3] = T(12) * exp(-(log_K0 + log_phi0) / T(3)) * a;
    } else {
      const T base = berger_series_residuals_t(j).r3[k - 1];
      j.y2[k] = -base / T(k * (k - 3.0));
    }
    const SeriesResidualsT<T> r = berger_series_residuals_t(j);
    if (k == 2)
      j.y1[k] = -r.r2[k - 1] / T(k * (k - 6.0));
    else
      j.y1[k] = -r.r1[k - 1] / T(k * (k - 2.0));
  }
  return j;
}

/// Center recursion in s = 1 - x: the coefficient of s^k enters the order-k
/// residual with indicial factors 4(k+4)(k-2) (r3, y2) and 4(k+1)(k+4)
/// (r2, y1). The y2 resonance at k = 2 carries the free parameter q.
template <class T>
JetT<T> berger_center_jet_t(const T& q, int order) {
  const int n = order + 1;
  JetT<T> j;
  j.endpoint = Endpoint::Center;
  j.order = order;
  j.y1.assign(n, T(0));
  j.y2.assign(n, T(0));
  for (int k = 0; k < n; ++k) {
    if (k == 2) {
      j.y2[2] = q / T(2);
    } else {
      const T base = berger_series_residuals_t(j).r3[k];
      j.y2[k] = -base / T(4.0 * (k + 4.0) * (k - 2.0));
    }
    const T base = berger_series_residuals_t(j).r2[k];
    j.y1[k] = -base / T(4.0 * (k + 1.0) * (k + 4.0));
  }
  return j;
}

/// Jet values and x-derivatives at x (no trust-radius check).
template <class T>
JetValueT<T> eval_jet_t(const JetT<T>& j, const T& x) {
  const bool center = j.endpoint == Endpoint::Center;
  const T t = center ? T(1) - x : x;
  const T sign = center ? T(-1) : T(1);
  JetValueT<T> v;
  series::evaluate(j.y1, t, v.y1, v.dy1, v.d2y1);
  series::evaluate(j.y2, t, v.y2, v.dy2, v.d2y2);
  if (!j.y3.empty()) series::evaluate(j.y3, t, v.y3, v.dy3, v.d2y3);
  v.dy1 *= sign;
  v.dy2 *= sign;
  v.dy3 *= sign;
  return v;
}

}  // namespace cce
