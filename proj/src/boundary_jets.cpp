#include "cce/boundary_jets.hpp"

#include <cmath>
#include <string>

#include "cce/errors.hpp"
#include "cce/invariant_geometry.hpp"

namespace cce {

double curvature_combination(double phi, double K) {
  return 3.0 - 4.0 * std::cbrt(1.0 / (phi * K)) +
         std::cbrt(1.0 / K) * std::pow(phi, -4.0 / 3.0);
}

double k0_lower_bound(double phi0) {
  const double b = (4.0 * std::pow(phi0, -1.0 / 3.0) - std::pow(phi0, -4.0 / 3.0)) / 3.0;
  return b > 0.0 ? b * b * b : 0.0;
}

void validate_boundary_data(const BergerBoundaryData& bd) {
  if (!std::isfinite(bd.phi0) || !std::isfinite(bd.K0) || !std::isfinite(bd.a))
    throw DomainError("boundary data must be finite");
  if (!(bd.phi0 > 0.25 && bd.phi0 < 4.0))
    throw DomainError("phi0 must lie in (1/4, 4), got " + std::to_string(bd.phi0));
  if (!(bd.K0 > 0.0 && bd.K0 <= 1.0))
    throw DomainError("K0 must lie in (0, 1], got " + std::to_string(bd.K0));
  if (bd.phi0 == 1.0) {
    // round conformal infinity: the filling is hyperbolic space
    if (bd.K0 != 1.0) throw DomainError("K0 must equal 1 when phi0 = 1");
    return;
  }
  if (!(curvature_combination(bd.phi0, bd.K0) > 0.0))
    throw DomainError("3 - 4(phi0 K0)^(-1/3) + K0^(-1/3) phi0^(-4/3) must be positive");
}

Eigen::Matrix3d g2_from_boundary_metric(const Eigen::Matrix3d& ghat) {
  require_positive_definite(ghat);
  const Eigen::Matrix3d ric = ricci_invariant(ghat, su2_structure());
  const double scal = (inverse3(ghat) * ric).trace();
  return scal / 4.0 * ghat - ric;
}

double y1_second_derivative_at_boundary(double phi0, double K0) {
  return 4.0 * curvature_combination(phi0, K0);
}

double y2_second_derivative_at_boundary(double phi0, double K0) {
  return 32.0 * std::cbrt(1.0 / K0) * std::pow(phi0, -4.0 / 3.0) * (1.0 - phi0);
}

double y2_third_coefficient(double phi0, double K0, double a) {
  return 12.0 * std::cbrt(1.0 / (K0 * phi0)) * a;
}

double y1_fifth_coefficient(double phi0, double K0, double a) {
  return -256.0 / 5.0 * std::pow(K0, -2.0 / 3.0) * std::pow(phi0, -5.0 / 3.0) *
         (1.0 - phi0) * a;
}

SeriesResiduals berger_series_residuals(const Jet& j) {
  return berger_series_residuals_t(j);
}

Jet berger_boundary_jet_unchecked(const BergerBoundaryData& bd, int order) {
  if (order < 5) throw DomainError("boundary jet order must be >= 5");
  if (!(bd.phi0 > 0.0 && bd.K0 > 0.0))
    throw DomainError("phi0 and K0 must be positive");
  return berger_boundary_jet_t<double>(std::log(bd.phi0), std::log(bd.K0), bd.a, order);
}

Jet berger_boundary_jet(const BergerBoundaryData& bd, int order) {
  validate_boundary_data(bd);
  return berger_boundary_jet_unchecked(bd, order);
}

Jet berger_center_jet(double q, int order) {
  if (order < 4) throw DomainError("center jet order must be >= 4");
  return berger_center_jet_t<double>(q, order);
}

JetValue eval_jet(const Jet& j, double x, double trust_radius) {
  const double t = j.endpoint == Endpoint::Center ? 1.0 - x : x;
  if (!(std::fabs(t) <= trust_radius))
    throw DomainError("jet evaluated outside its trust radius at x=" + std::to_string(x));
  return eval_jet_t(j, x);
}

}  // namespace cce
