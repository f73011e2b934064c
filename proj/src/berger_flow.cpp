#include "cce/berger_flow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cce/errors.hpp"

namespace cce {

namespace {

constexpr double kRadicandClamp = -1e-13;

// e^u = (K phi)^(-1/3), e^v = K^(-1/3) phi^(-4/3)
inline double u_of(double y1, double y2) { return -(y1 + y2) / 3.0; }
inline double v_of(double y1, double y2) { return -(y1 + 4.0 * y2) / 3.0; }

}  // namespace

double curvature_term(double y1, double y2) {
  return -4.0 * std::expm1(u_of(y1, y2)) + std::expm1(v_of(y1, y2));
}

double branch_radicand(double x, double y1, double y2, double w) {
  const double om = 1.0 - x * x;
  const double eu = std::exp(u_of(y1, y2));
  const double ev = std::exp(v_of(y1, y2));
  return om * om + x * x * om * om * w * w / 36.0 +
         (4.0 / 3.0) * x * x * (4.0 * eu - ev);
}

double y1prime_algebraic(double x, double y1, double y2, double w) {
  double R = branch_radicand(x, y1, y2, w);
  if (!(R >= 0.0)) {
    if (R > kRadicandClamp)
      R = 0.0;
    else
      throw BranchDomainError(x, R);
  }
  const double om = 1.0 - x * x;
  const double B = curvature_term(y1, y2);
  // 1 + x^2 - sqrt(R) = ((1+x^2)^2 - R) / (1 + x^2 + sqrt(R)) and
  // (1+x^2)^2 - R = x^2 [(4/3) B - (1-x^2)^2 w^2 / 36].
  return 6.0 * x * ((4.0 / 3.0) * B - om * om * w * w / 36.0) /
         (om * (1.0 + x * x + std::sqrt(R)));
}

BergerDerivs rhs(const BergerState& s) {
  const double x = s.x;
  const double om = 1.0 - x * x;
  BergerDerivs d;
  d.dy1 = y1prime_algebraic(x, s.y1, s.y2, s.w);
  d.dy2 = s.w;
  // 32 (1-x^2)^-2 K^(-1/3) phi^(-1/3) (phi^-1 - 1), with the last factor as expm1.
  const double source = 32.0 / (om * om) * std::exp(u_of(s.y1, s.y2)) * std::expm1(-s.y2);
  d.dw = -(0.5 * d.dy1 * s.w - 2.0 * (1.0 + 2.0 * x * x) / (x * om) * s.w + source);
  return d;
}

double y1_second_derivative(double x, double y1, double y2, double w, double dy1,
                            double dw) {
  const double x2 = x * x;
  const double om = 1.0 - x2;
  const double A = 12.0 * (1.0 + x2) / (x * om);
  const double Ax = 12.0 * (x2 * x2 + 4.0 * x2 - 1.0) / (x2 * om * om);
  const double B = curvature_term(y1, y2);
  const double eu = std::exp(u_of(y1, y2));
  const double ev = std::exp(v_of(y1, y2));
  const double B1 = (4.0 / 3.0) * eu - (1.0 / 3.0) * ev;
  const double B2 = (4.0 / 3.0) * eu - (4.0 / 3.0) * ev;
  const double num = 2.0 * w * dw + Ax * dy1 -
                     48.0 * (4.0 * x / (om * om * om) * B + (B1 * dy1 + B2 * w) / (om * om));
  return num / (2.0 * dy1 - A);
}

double constraint_phi(double x, double y1, double dy1, double y2, double w) {
  const double om = 1.0 - x * x;
  return dy1 * dy1 - w * w - 12.0 * (1.0 + x * x) / (x * om) * dy1 +
         48.0 / (om * om) * curvature_term(y1, y2);
}

double constraint_phi(const BergerState& s) {
  return constraint_phi(s.x, s.y1, y1prime_algebraic(s.x, s.y1, s.y2, s.w), s.y2, s.w);
}

std::array<double, 4> full_residuals(double x, double y1, double dy1, double d2y1,
                                     double y2, double dy2, double d2y2) {
  return full_residuals_t<double>(x, y1, dy1, d2y1, y2, dy2, d2y2);
}

ProfileSample make_sample(double x, double y1, double y2, double w, int segment) {
  ProfileSample p;
  p.x = x;
  p.y1 = y1;
  p.y2 = y2;
  p.w = w;
  const BergerDerivs d = rhs({x, y1, y2, w});
  p.dy1 = d.dy1;
  p.dw = d.dw;
  p.d2y1 = y1_second_derivative(x, y1, y2, w, d.dy1, d.dw);
  p.segment = segment;
  return p;
}

namespace {

using Vec3 = Eigen::Vector3d;

struct BergerField {
  Vec3 operator()(double x, const Vec3& y) const {
    const BergerDerivs d = rhs({x, y(0), y(1), y(2)});
    return {d.dy1, d.dy2, d.dw};
  }
};

}  // namespace

double graded_fraction(double t) {
  // a quarter uniform keeps finite differences at the dense end above round-off
  constexpr double uniform = 0.25;
  return uniform * t + (1.0 - uniform) * (1.0 - std::cos(0.5 * M_PI * t));
}

Segment integrate(const BergerState& start, double x_end, const FlowOptions& opt,
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

  Segment seg;
  const Vec3 y0(start.y1, start.y2, start.w);
  auto monitor = [&](double x, const Vec3& y) {
    const double phi = std::fabs(constraint_phi({x, y(0), y(1), y(2)}));
    seg.max_abs_phi = std::max(seg.max_abs_phi, phi);
  };
  monitor(start.x, y0);
  const auto res = integrate_adaptive<3>(BergerField{}, start.x, y0, x_end, grid, io, monitor);
  seg.steps = res.steps;
  seg.samples.reserve(res.x_out.size());
  for (std::size_t i = 0; i < res.x_out.size(); ++i) {
    const Vec3& y = res.y_out[i];
    seg.samples.push_back(make_sample(res.x_out[i], y(0), y(1), y(2), segment_id));
  }
  seg.end = {x_end, res.y_end(0), res.y_end(1), res.y_end(2)};
  return seg;
}

BergerState integrate_fixed_steps(const BergerState& start, double x_end, long n_steps) {
  const Vec3 y = integrate_fixed<3>(BergerField{}, start.x,
                                    Vec3(start.y1, start.y2, start.w), x_end, n_steps);
  return {x_end, y(0), y(1), y(2)};
}

std::vector<double> fornberg_weights(double z, const std::vector<double>& xs, int m) {
  const int n = static_cast<int>(xs.size());
  std::vector<std::vector<double>> c(n, std::vector<double>(m + 1, 0.0));
  double c1 = 1.0;
  double c4 = xs[0] - z;
  c[0][0] = 1.0;
  for (int i = 1; i < n; ++i) {
    const int mn = std::min(i, m);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = xs[i] - z;
    for (int j = 0; j < i; ++j) {
      const double c3 = xs[i] - xs[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k)
          c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
        c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
      }
      for (int k = mn; k >= 1; --k) c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
      c[j][0] = c4 * c[j][0] / c3;
    }
    c1 = c2;
  }
  std::vector<double> w(n);
  for (int i = 0; i < n; ++i) w[i] = c[i][m];
  return w;
}

void finite_difference_derivatives(const std::vector<double>& x,
                                   const std::vector<double>& y,
                                   std::vector<double>& dy, std::vector<double>& d2y) {
  const int n = static_cast<int>(x.size());
  if (n < 7) throw DomainError("finite differences need at least 7 samples");
  dy.assign(n, 0.0);
  d2y.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    const int lo = std::clamp(i - 3, 0, n - 7);
    const std::vector<double> xs(x.begin() + lo, x.begin() + lo + 7);
    const auto w1 = fornberg_weights(x[i], xs, 1);
    const auto w2 = fornberg_weights(x[i], xs, 2);
    for (int k = 0; k < 7; ++k) {
      dy[i] += w1[k] * y[lo + k];
      d2y[i] += w2[k] * y[lo + k];
    }
  }
}

std::vector<std::array<double, 4>> fd_residuals(const SolutionProfile& p) {
  const auto& s = p.samples;
  const int n = static_cast<int>(s.size());
  std::vector<std::array<double, 4>> out(n);
  for (auto& r : out) r.fill(std::numeric_limits<double>::quiet_NaN());
  int begin = 0;
  while (begin < n) {
    int end = begin;
    while (end < n && s[end].segment == s[begin].segment) ++end;
    if (end - begin >= 7) {
      std::vector<double> xs, a, b, da, d2a, db, d2b;
      for (int i = begin; i < end; ++i) {
        xs.push_back(s[i].x);
        a.push_back(s[i].y1);
        b.push_back(s[i].y2);
      }
      finite_difference_derivatives(xs, a, da, d2a);
      finite_difference_derivatives(xs, b, db, d2b);
      for (int i = 0; i < end - begin; ++i)
        out[begin + i] = full_residuals(xs[i], a[i], da[i], d2a[i], b[i], db[i], d2b[i]);
    }
    begin = end;
  }
  return out;
}

bool DiagnosticsReport::monotonicity_ok() const {
  return y1p_positive_violations == 0 && y2p_sign_violations == 0 &&
         M_monotone_violations == 0 && N_monotone_violations == 0;
}

bool DiagnosticsReport::bounds_ok() const {
  return y1p_upper_violations == 0 && curvature_bound_violations == 0 &&
         K_violations == 0 && phi_range_violations == 0;
}

bool DiagnosticsReport::all_ok() const { return monotonicity_ok() && bounds_ok(); }

DiagnosticsReport diagnostics(const SolutionProfile& p, double slack) {
  DiagnosticsReport rep;
  const auto& s = p.samples;
  const int n = static_cast<int>(s.size());
  rep.samples = n;
  if (n == 0) return rep;
  const double phi0 = p.params.phi0;
  const bool round = std::fabs(phi0 - 1.0) < 1e-14;
  const double sgn = phi0 < 1.0 ? 1.0 : -1.0;  // expected sign of y2'
  const double y2_0 = std::log(phi0);

  rep.min_y1p = rep.max_y1p = s[0].dy1;
  std::vector<double> M(n), N(n);
  for (int i = 0; i < n; ++i) {
    const ProfileSample& q = s[i];
    const double x = q.x, om = 1.0 - x * x;
    rep.min_y1p = std::min(rep.min_y1p, q.dy1);
    rep.max_y1p = std::max(rep.max_y1p, q.dy1);
    if (!round) {
      if (!(q.dy1 > 0.0)) ++rep.y1p_positive_violations;
      if (!(sgn * q.w > 0.0)) ++rep.y2p_sign_violations;
      if (!(q.y1 < 0.0)) ++rep.K_violations;
      const bool between = phi0 < 1.0 ? (q.y2 > y2_0 && q.y2 < 0.0)
                                      : (q.y2 < y2_0 && q.y2 > 0.0);
      if (!between) ++rep.phi_range_violations;
    }
    if (!(q.dy1 < 12.0 * x / om)) ++rep.y1p_upper_violations;
    const double lhs = curvature_term(q.y1, q.y2);
    const double rhs_b = x * x * om * om * q.w * q.w / 36.0;
    if (!(lhs > rhs_b) && !(round && lhs == 0.0 && rhs_b == 0.0))
      ++rep.curvature_bound_violations;
    M[i] = om * om * q.dy1 / x;
    N[i] = om * om * om * std::exp(0.5 * q.y1) * q.w / (x * x);
    const auto r = full_residuals(x, q.y1, q.dy1, q.d2y1, q.y2, q.w, q.dw);
    for (double v : r) rep.max_closure_residual = std::max(rep.max_closure_residual, std::fabs(v));
    rep.max_abs_phi = std::max(rep.max_abs_phi, std::fabs(r[3]));
  }
  for (int i = 0; i + 1 < n; ++i) {
    if (M[i + 1] - M[i] > slack * std::max(1.0, std::fabs(M[i]))) ++rep.M_monotone_violations;
    if (!round && -sgn * (N[i + 1] - N[i]) < -slack * std::max(1.0, std::fabs(N[i])))
      ++rep.N_monotone_violations;
  }

  for (const auto& r : fd_residuals(p))
    for (double v : r)
      if (std::isfinite(v)) rep.max_residual = std::max(rep.max_residual, std::fabs(v));
  rep.max_abs_phi = std::max(rep.max_abs_phi, p.max_abs_phi);
  return rep;
}

}  // namespace cce
