#include "cce/gen_berger_flow.hpp"

#include <algorithm>
#include <cmath>

#include "cce/errors.hpp"
#include "cce/integrator.hpp"

namespace cce {

namespace {

constexpr double kRadicandClamp = -1e-13;

// The six monomials K^-1/3 phi1^(b/3) phi2^(c/3) = exp(u_i) with
// 3 u_i = -y1 + b y2 + c y3, and their weights in the curvature combination
// and in the two sources.
constexpr int kU[6][3] = {{-1, 2, 1}, {-1, -1, 1}, {-1, -1, -2},
                          {-1, -4, -2}, {-1, 2, -2}, {-1, 2, 4}};
constexpr double kWB[6] = {-2, -2, -2, 1, 1, 1};
constexpr double kW2[6] = {1, -1, 0, 1, -1, 0};
constexpr double kW3[6] = {0, 1, -1, 0, 1, -1};

inline double u_of(int i, double y1, double y2, double y3) {
  return (kU[i][0] * y1 + kU[i][1] * y2 + kU[i][2] * y3) / 3.0;
}

// sum_i w_i expm1(u_i). The constant parts cancel exactly (3 + sum w_B = 0,
// sum w_2 = sum w_3 = 0), so this is B, c2 or c3 without cancellation.
double weighted_expm1(const double (&w)[6], double y1, double y2, double y3) {
  double s = 0.0;
  for (int i = 0; i < 6; ++i)
    if (w[i] != 0.0) s += w[i] * std::expm1(u_of(i, y1, y2, y3));
  return s;
}

double q_form(double w2, double w3) { return w2 * w2 + w2 * w3 + w3 * w3; }

}  // namespace

std::array<double, 3> gen_eigenvalues(double y1, double y2, double y3) {
  return {std::exp((y1 - 2.0 * y2 - y3) / 3.0), std::exp((y1 + y2 - y3) / 3.0),
          std::exp((y1 + y2 + 2.0 * y3) / 3.0)};
}

double gen_curvature_term(double y1, double y2, double y3) {
  return weighted_expm1(kWB, y1, y2, y3);
}

double gen_source2(double y1, double y2, double y3) { return weighted_expm1(kW2, y1, y2, y3); }

double gen_source3(double y1, double y2, double y3) { return weighted_expm1(kW3, y1, y2, y3); }

double gen_branch_radicand(double x, double y1, double y2, double y3, double w2, double w3) {
  const double om = 1.0 - x * x;
  // 3 - B = sum_i (-w_i) exp(u_i)
  double three_minus_B = 0.0;
  for (int i = 0; i < 6; ++i) three_minus_B -= kWB[i] * std::exp(u_of(i, y1, y2, y3));
  return om * om + x * x * om * om * q_form(w2, w3) / 36.0 + (4.0 / 3.0) * x * x * three_minus_B;
}

double y1prime_algebraic_gen(double x, double y1, double y2, double y3, double w2, double w3) {
  double R = gen_branch_radicand(x, y1, y2, y3, w2, w3);
  if (!(R >= 0.0)) {
    if (R > kRadicandClamp)
      R = 0.0;
    else
      throw BranchDomainError(x, R);
  }
  const double om = 1.0 - x * x;
  const double B = gen_curvature_term(y1, y2, y3);
  return 6.0 * x * ((4.0 / 3.0) * B - om * om * q_form(w2, w3) / 36.0) /
         (om * (1.0 + x * x + std::sqrt(R)));
}

GenBergerDerivs gen_rhs(const GenBergerState& s) {
  const double x = s.x;
  const double om = 1.0 - x * x;
  const double c = 2.0 * (1.0 + 2.0 * x * x) / (x * om);
  GenBergerDerivs d;
  d.dy1 = y1prime_algebraic_gen(x, s.y1, s.y2, s.y3, s.w2, s.w3);
  d.dy2 = s.w2;
  d.dy3 = s.w3;
  d.dw2 = -(0.5 * d.dy1 * s.w2 - c * s.w2 + 32.0 / (om * om) * gen_source2(s.y1, s.y2, s.y3));
  d.dw3 = -(0.5 * d.dy1 * s.w3 - c * s.w3 + 32.0 / (om * om) * gen_source3(s.y1, s.y2, s.y3));
  return d;
}

double gen_y1_second_derivative(double x, double dy1, double w2, double w3) {
  const double om = 1.0 - x * x;
  return (1.0 + 3.0 * x * x) / (x * om) * dy1 - dy1 * dy1 / 6.0 - q_form(w2, w3) / 3.0;
}

double gen_constraint_phi(double x, double y1, double dy1, double y2, double y3, double w2,
                          double w3) {
  const double om = 1.0 - x * x;
  return dy1 * dy1 - q_form(w2, w3) - 12.0 * (1.0 + x * x) / (x * om) * dy1 +
         48.0 / (om * om) * gen_curvature_term(y1, y2, y3);
}

std::array<double, 5> residuals_gen(double x, double y1, double dy1, double d2y1, double y2,
                                    double dy2, double d2y2, double y3, double dy3, double d2y3) {
  const double om = 1.0 - x * x;
  const double Q = q_form(dy2, dy3);
  const double B = gen_curvature_term(y1, y2, y3);
  const double c = 2.0 * (1.0 + 2.0 * x * x) / (x * om);
  std::array<double, 5> r;
  r[0] = d2y1 - (1.0 + 3.0 * x * x) / (x * om) * dy1 + dy1 * dy1 / 6.0 + Q / 3.0;
  r[1] = d2y1 - (5.0 + 7.0 * x * x) / (x * om) * dy1 + dy1 * dy1 / 2.0 + 16.0 / (om * om) * B;
  r[2] = d2y2 - c * dy2 + 0.5 * dy1 * dy2 + 32.0 / (om * om) * gen_source2(y1, y2, y3);
  r[3] = d2y3 - c * dy3 + 0.5 * dy1 * dy3 + 32.0 / (om * om) * gen_source3(y1, y2, y3);
  r[4] = gen_constraint_phi(x, y1, dy1, y2, y3, dy2, dy3);
  return r;
}

std::array<double, 3> gen_g3_diagonal(const GenBergerBoundaryData& bd) {
  const auto I = gen_eigenvalues(std::log(bd.K0), std::log(bd.phi1_0), std::log(bd.phi2_0));
  const double g22 = bd.a2, g33 = bd.a2 + bd.a3;
  return {-I[0] * (g22 / I[1] + g33 / I[2]), g22, g33};
}

double gen_y2_second_derivative_at_boundary(double phi1_0, double phi2_0, double K0) {
  return 32.0 * gen_source2(std::log(K0), std::log(phi1_0), std::log(phi2_0));
}

double gen_y3_second_derivative_at_boundary(double phi1_0, double phi2_0, double K0) {
  return 32.0 * gen_source3(std::log(K0), std::log(phi1_0), std::log(phi2_0));
}

void validate_gen_boundary_data(const GenBergerBoundaryData& bd) {
  if (!(bd.phi1_0 > 0.0 && bd.phi2_0 > 0.0 && std::isfinite(bd.phi1_0) && std::isfinite(bd.phi2_0)))
    throw DomainError("phi1_0 and phi2_0 must be positive");
  if (!(bd.K0 > 0.0 && bd.K0 <= 1.0)) throw DomainError("K0 must lie in (0, 1]");
  if (!(std::isfinite(bd.a2) && std::isfinite(bd.a3))) throw DomainError("a2, a3 must be finite");
  if (bd.phi1_0 == 1.0 && bd.phi2_0 == 1.0) {
    if (bd.K0 != 1.0) throw DomainError("round boundary data requires K0 = 1");
    return;
  }
  if (!(gen_curvature_term(std::log(bd.K0), std::log(bd.phi1_0), std::log(bd.phi2_0)) > 0.0))
    throw DomainError("curvature combination at x = 0 must be positive");
}

GenSeriesResiduals gen_series_residuals(const Jet& j) {
  using namespace series;
  const int n = static_cast<int>(j.y1.size());
  const bool center = j.endpoint == Endpoint::Center;
  const Series X = center ? poly<double>({1.0, -1.0}, n) : poly<double>({0.0, 1.0}, n);
  const double sign = center ? -1.0 : 1.0;
  const Series one = constant(1.0, n);
  const Series X2 = mul(X, X);
  const Series om = sub(one, X2);
  const Series om2 = mul(om, om);
  const Series y3 = j.y3.empty() ? Series(n, 0.0) : j.y3;

  const Series d1 = scale(der(j.y1), sign);
  const Series d2 = scale(der(j.y2), sign);
  const Series d3 = scale(der(y3), sign);
  const Series dd1 = der(der(j.y1));
  const Series dd2 = der(der(j.y2));
  const Series dd3 = der(der(y3));

  Series B(n, 0.0), c2(n, 0.0), c3(n, 0.0);
  B[0] = 3.0;
  for (int i = 0; i < 6; ++i) {
    const Series e = exp_lin(kU[i][0] / 3.0, j.y1, kU[i][1] / 3.0, j.y2, kU[i][2] / 3.0, y3);
    B = add(B, scale(e, kWB[i]));
    c2 = add(c2, scale(e, kW2[i]));
    c3 = add(c3, scale(e, kW3[i]));
  }
  const Series Q = add(add(mul(d2, d2), mul(d2, d3)), mul(d3, d3));
  const Series c = scale(mul(add(one, scale(X2, 2.0)), om), 2.0);

  GenSeriesResiduals r;
  r.r1 = sub(mul(X, om, add(dd1, add(scale(mul(d1, d1), 1.0 / 6.0), scale(Q, 1.0 / 3.0)))),
             mul(add(one, scale(X2, 3.0)), d1));
  r.r2 = add(sub(mul(X, om2, add(dd1, scale(mul(d1, d1), 0.5))),
                 mul(add(scale(one, 5.0), scale(X2, 7.0)), om, d1)),
             scale(mul(X, B), 16.0));
  r.r3 = add(sub(mul(X, om2, add(dd2, scale(mul(d1, d2), 0.5))), mul(c, d2)),
             scale(mul(X, c2), 32.0));
  r.r4 = add(sub(mul(X, om2, add(dd3, scale(mul(d1, d3), 0.5))), mul(c, d3)),
             scale(mul(X, c3), 32.0));
  return r;
}

Jet gen_boundary_jet_unchecked(const GenBergerBoundaryData& bd, int order) {
  if (order < 4) throw DomainError("boundary jet order must be >= 4");
  if (!(bd.phi1_0 > 0.0 && bd.phi2_0 > 0.0 && bd.K0 > 0.0))
    throw DomainError("phi1_0, phi2_0 and K0 must be positive");
  const int n = order + 1;
  Jet j;
  j.endpoint = Endpoint::Boundary;
  j.order = order;
  j.y1.assign(n, 0.0);
  j.y2.assign(n, 0.0);
  j.y3.assign(n, 0.0);
  j.y1[0] = std::log(bd.K0);
  j.y2[0] = std::log(bd.phi1_0);
  j.y3[0] = std::log(bd.phi2_0);
  const auto I = gen_eigenvalues(j.y1[0], j.y2[0], j.y3[0]);
  const auto g = gen_g3_diagonal(bd);
  for (int k = 1; k < n; ++k) {
    if (k == 3) {
      j.y2[3] = 4.0 * (g[1] / I[1] - g[0] / I[0]);
      j.y3[3] = 4.0 * (g[2] / I[2] - g[1] / I[1]);
    } else {
      const GenSeriesResiduals r = gen_series_residuals(j);
      j.y2[k] = -r.r3[k - 1] / (k * (k - 3.0));
      j.y3[k] = -r.r4[k - 1] / (k * (k - 3.0));
    }
    const GenSeriesResiduals r = gen_series_residuals(j);
    if (k == 2)
      j.y1[k] = -r.r2[k - 1] / (k * (k - 6.0));
    else
      j.y1[k] = -r.r1[k - 1] / (k * (k - 2.0));
  }
  return j;
}

Jet gen_boundary_jet(const GenBergerBoundaryData& bd, int order) {
  validate_gen_boundary_data(bd);
  return gen_boundary_jet_unchecked(bd, order);
}

Jet gen_center_jet(double q2, double q3, int order) {
  if (order < 4) throw DomainError("center jet order must be >= 4");
  const int n = order + 1;
  Jet j;
  j.endpoint = Endpoint::Center;
  j.order = order;
  j.y1.assign(n, 0.0);
  j.y2.assign(n, 0.0);
  j.y3.assign(n, 0.0);
  for (int k = 0; k < n; ++k) {
    if (k == 2) {
      j.y2[2] = q2 / 2.0;
      j.y3[2] = q3 / 2.0;
    } else {
      const GenSeriesResiduals r = gen_series_residuals(j);
      j.y2[k] = -r.r3[k] / (4.0 * (k + 4.0) * (k - 2.0));
      j.y3[k] = -r.r4[k] / (4.0 * (k + 4.0) * (k - 2.0));
    }
    const GenSeriesResiduals r = gen_series_residuals(j);
    j.y1[k] = -r.r2[k] / (4.0 * (k + 1.0) * (k + 4.0));
  }
  return j;
}

GenProfileSample gen_make_sample(const GenBergerState& s, int segment) {
  GenProfileSample p;
  p.x = s.x;
  p.y1 = s.y1;
  p.y2 = s.y2;
  p.y3 = s.y3;
  p.w2 = s.w2;
  p.w3 = s.w3;
  const GenBergerDerivs d = gen_rhs(s);
  p.dy1 = d.dy1;
  p.dw2 = d.dw2;
  p.dw3 = d.dw3;
  p.d2y1 = gen_y1_second_derivative(s.x, d.dy1, s.w2, s.w3);
  p.segment = segment;
  return p;
}

namespace {

using Vec5 = Eigen::Matrix<double, 5, 1>;

GenBergerState state_of(double x, const Vec5& y) { return {x, y(0), y(1), y(2), y(3), y(4)}; }

struct GenField {
  Vec5 operator()(double x, const Vec5& y) const {
    const GenBergerDerivs d = gen_rhs(state_of(x, y));
    Vec5 f;
    f << d.dy1, d.dy2, d.dy3, d.dw2, d.dw3;
    return f;
  }
};

}  // namespace

GenSegment gen_integrate(const GenBergerState& start, double x_end, const FlowOptions& opt,
                         int segment_id) {
  if (!(start.x > 0.0 && start.x < 1.0 && x_end > 0.0 && x_end < 1.0))
    throw DomainError("integration interval must lie inside (0,1)");
  const int n_out = std::max(2, opt.n_out);
  std::vector<double> grid(n_out);
  for (int i = 0; i < n_out; ++i) {
    const double t = static_cast<double>(i) / (n_out - 1);
    const double u = opt.graded ? graded_fraction(t) : t;
    grid[i] = start.x + (x_end - start.x) * u;
  }
  grid.back() = x_end;

  IntegratorOptions io;
  io.rtol = opt.rtol;
  io.atol = opt.atol;
  io.h_min = opt.h_min;
  io.max_steps = opt.max_steps;

  GenSegment seg;
  Vec5 y0;
  y0 << start.y1, start.y2, start.y3, start.w2, start.w3;
  auto monitor = [&](double x, const Vec5& y) {
    const GenBergerState s = state_of(x, y);
    const double dy1 = y1prime_algebraic_gen(x, s.y1, s.y2, s.y3, s.w2, s.w3);
    seg.max_abs_phi = std::max(
        seg.max_abs_phi, std::fabs(gen_constraint_phi(x, s.y1, dy1, s.y2, s.y3, s.w2, s.w3)));
  };
  monitor(start.x, y0);
  const auto res = integrate_adaptive<5>(GenField{}, start.x, y0, x_end, grid, io, monitor);
  seg.steps = res.steps;
  seg.samples.reserve(res.x_out.size());
  for (std::size_t i = 0; i < res.x_out.size(); ++i)
    seg.samples.push_back(gen_make_sample(state_of(res.x_out[i], res.y_out[i]), segment_id));
  seg.end = state_of(x_end, res.y_end);
  return seg;
}

}  // namespace cce
