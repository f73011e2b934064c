#pragma once

// Dormand-Prince 5(4) integrator with the fourth-order continuous extension,
// usable in either direction of the independent variable.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <vector>

#include "cce/errors.hpp"

namespace cce {

struct IntegratorOptions {
  double rtol = 1e-10;
  double atol = 1e-12;
  double h_min = 1e-14;      // step-size floor (absolute)
  double h_init = 0.0;       // 0 selects an automatic first step
  long max_steps = 1000000;
};

template <int N>
struct DenseStep {
  using Vec = Eigen::Matrix<double, N, 1>;
  double x0 = 0, h = 0;
  Vec r1, r2, r3, r4, r5;

  Vec operator()(double x) const {
    const double th = (x - x0) / h;
    const double th1 = 1.0 - th;
    return r1 + th * (r2 + th1 * (r3 + th * (r4 + th1 * r5)));
  }
};

template <int N>
struct IntegrationResult {
  using Vec = Eigen::Matrix<double, N, 1>;
  std::vector<double> x_out;
  std::vector<Vec> y_out;
  Vec y_end;
  long steps = 0;
  long rejected = 0;
};

namespace dp {
inline constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
inline constexpr double a21 = 1.0 / 5;
inline constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
inline constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
inline constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                        a53 = 64448.0 / 6561, a54 = -212.0 / 729;
inline constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                        a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                        a65 = -5103.0 / 18656;
inline constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                        a75 = -2187.0 / 6784, a76 = 11.0 / 84;
inline constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                        e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
inline constexpr double d1 = -12715105075.0 / 11282082432.0,
                        d3 = 87487479700.0 / 32700410799.0,
                        d4 = -10690763975.0 / 1880347072.0,
                        d5 = 701980252875.0 / 199316789632.0,
                        d6 = -1453857185.0 / 822651844.0,
                        d7 = 69997945.0 / 29380423.0;
}  // namespace dp

/// One Dormand-Prince step from (x, y) with step h; k1 = f(x, y) must be
/// supplied. Fills the new state, k7 = f(x+h, y_new), the embedded error
/// vector and the dense-output coefficients.
template <int N, class F>
void dp_step(F& f, double x, const Eigen::Matrix<double, N, 1>& y,
             const Eigen::Matrix<double, N, 1>& k1, double h,
             Eigen::Matrix<double, N, 1>& y_new, Eigen::Matrix<double, N, 1>& k7,
             Eigen::Matrix<double, N, 1>& err, DenseStep<N>& dense) {
  using namespace dp;
  using Vec = Eigen::Matrix<double, N, 1>;
  const Vec k2 = f(x + c2 * h, Vec(y + h * a21 * k1));
  const Vec k3 = f(x + c3 * h, Vec(y + h * (a31 * k1 + a32 * k2)));
  const Vec k4 = f(x + c4 * h, Vec(y + h * (a41 * k1 + a42 * k2 + a43 * k3)));
  const Vec k5 =
      f(x + c5 * h, Vec(y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4)));
  const Vec k6 = f(x + h, Vec(y + h * (a61 * k1 + a62 * k2 + a63 * k3 +
                                       a64 * k4 + a65 * k5)));
  y_new = y + h * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
  k7 = f(x + h, y_new);
  err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
  dense.x0 = x;
  dense.h = h;
  dense.r1 = y;
  dense.r2 = y_new - y;
  dense.r3 = h * k1 - dense.r2;
  dense.r4 = dense.r2 - h * k7 - dense.r3;
  dense.r5 = h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);
}

/// Adaptive integration of y' = f(x, y) from x0 to x1 (either direction).
/// Dense output is produced at each abscissa in out_x, which must be ordered
/// in the direction of integration and lie within [x0, x1]. on_step(x, y) is
/// called after every accepted step. Exceptions thrown by f that derive from
/// DomainError shrink the step; if the step floor is reached they propagate.
template <int N, class F, class OnStep>
IntegrationResult<N> integrate_adaptive(F f, double x0,
                                        const Eigen::Matrix<double, N, 1>& y0,
                                        double x1, const std::vector<double>& out_x,
                                        const IntegratorOptions& opt, OnStep on_step) {
  using Vec = Eigen::Matrix<double, N, 1>;
  IntegrationResult<N> res;
  const double dir = x1 >= x0 ? 1.0 : -1.0;
  const double span = std::fabs(x1 - x0);
  res.y_end = y0;
  if (span == 0.0) {
    for (double xo : out_x) {
      res.x_out.push_back(xo);
      res.y_out.push_back(y0);
    }
    return res;
  }

  auto norm = [&](const Vec& e, const Vec& ya, const Vec& yb) {
    double s = 0.0;
    for (int i = 0; i < N; ++i) {
      const double sk = opt.atol + opt.rtol * std::max(std::fabs(ya(i)), std::fabs(yb(i)));
      s += (e(i) / sk) * (e(i) / sk);
    }
    return std::sqrt(s / N);
  };

  double x = x0;
  Vec y = y0;
  Vec k1 = f(x, y);
  double h = opt.h_init;
  if (h <= 0.0) {
    // Hairer's starting-step heuristic.
    double d0 = 0, dd1 = 0;
    for (int i = 0; i < N; ++i) {
      const double sk = opt.atol + opt.rtol * std::fabs(y(i));
      d0 += (y(i) / sk) * (y(i) / sk);
      dd1 += (k1(i) / sk) * (k1(i) / sk);
    }
    d0 = std::sqrt(d0 / N);
    dd1 = std::sqrt(dd1 / N);
    h = (d0 < 1e-5 || dd1 < 1e-5) ? 1e-6 : 0.01 * d0 / dd1;
    h = std::min(h, span);
  }
  h = std::min(h, span);

  std::size_t next_out = 0;
  while (next_out < out_x.size() && dir * (out_x[next_out] - x0) <= 0.0) {
    res.x_out.push_back(out_x[next_out]);
    res.y_out.push_back(y0);
    ++next_out;
  }

  Vec y_new, k7, err;
  DenseStep<N> dense;
  double fac_old = 1e-4;
  bool last = false;
  while (!last) {
    if (res.steps + res.rejected >= opt.max_steps)
      throw StiffnessError(x, h);
    if (h < opt.h_min) throw StiffnessError(x, h);
    if (std::fabs(x1 - x) <= h * 1.0000001) {
      h = std::fabs(x1 - x);
      last = true;
    }
    const double hs = dir * h;
    double en;
    try {
      dp_step<N>(f, x, y, k1, hs, y_new, k7, err, dense);
      en = norm(err, y, y_new);
      if (!std::isfinite(en)) en = 1e10;
    } catch (const DomainError&) {
      if (h * 0.25 < opt.h_min) throw;
      h *= 0.25;
      last = false;
      ++res.rejected;
      continue;
    }
    if (en <= 1.0) {
      // PI step-size control (Hairer's dopri5 constants).
      const double fac11 = std::pow(en, 0.2 - 0.04 * 0.75);
      double fac = fac11 / std::pow(fac_old, 0.04);
      fac = std::clamp(fac / 0.9, 0.1, 5.0);
      fac_old = std::max(en, 1e-4);
      const double x_next = last ? x1 : x + hs;
      while (next_out < out_x.size() && dir * (out_x[next_out] - x_next) <= 0.0) {
        res.x_out.push_back(out_x[next_out]);
        res.y_out.push_back(dense(out_x[next_out]));
        ++next_out;
      }
      x = x_next;
      y = y_new;
      k1 = k7;
      ++res.steps;
      on_step(x, y);
      h = h / fac;
    } else {
      const double fac = std::min(5.0, std::pow(en, 0.2) / 0.9);
      h = h / fac;
      last = false;
      ++res.rejected;
    }
  }
  while (next_out < out_x.size()) {
    res.x_out.push_back(out_x[next_out]);
    res.y_out.push_back(y);
    ++next_out;
  }
  res.y_end = y;
  return res;
}

template <int N, class F>
IntegrationResult<N> integrate_adaptive(F f, double x0,
                                        const Eigen::Matrix<double, N, 1>& y0,
                                        double x1, const std::vector<double>& out_x,
                                        const IntegratorOptions& opt) {
  return integrate_adaptive<N>(f, x0, y0, x1, out_x, opt,
                               [](double, const Eigen::Matrix<double, N, 1>&) {});
}

/// Fixed-step Dormand-Prince (fifth-order propagation) with n_steps equal
/// steps; used for convergence studies.
template <int N, class F>
Eigen::Matrix<double, N, 1> integrate_fixed(F f, double x0,
                                            const Eigen::Matrix<double, N, 1>& y0,
                                            double x1, long n_steps) {
  using Vec = Eigen::Matrix<double, N, 1>;
  const double h = (x1 - x0) / static_cast<double>(n_steps);
  Vec y = y0, y_new, k7, err;
  Vec k1 = f(x0, y);
  DenseStep<N> dense;
  for (long i = 0; i < n_steps; ++i) {
    const double x = x0 + static_cast<double>(i) * h;
    dp_step<N>(f, x, y, k1, h, y_new, k7, err, dense);
    y = y_new;
    k1 = k7;
  }
  return y;
}

}  // namespace cce
