#include <doctest.h>

#include <cmath>
#include <random>

#include "cce/berger_flow.hpp"
#include "cce/boundary_jets.hpp"
#include "cce/errors.hpp"

using namespace cce;

TEST_CASE("y1prime_algebraic values") {
  for (double x : {0.01, 0.3, 0.5, 0.9, 0.999}) CHECK(y1prime_algebraic(x, 0, 0, 0) == 0.0);
  // 12 (4/3) [1.25 - sqrt(0.5625 + (4/3)(0.25) 0.8^(-1/3) 2^(-4/3) 7)]
  const double x = 0.5, y1 = std::log(0.8), y2 = std::log(2.0);
  const double direct =
      12.0 * (4.0 / 3.0) *
      (1.25 - std::sqrt(0.5625 + (4.0 / 3.0) * 0.25 * std::pow(0.8, -1.0 / 3.0) *
                                     std::pow(2.0, -4.0 / 3.0) * 7.0));
  CHECK(y1prime_algebraic(x, y1, y2, 0.0) == doctest::Approx(0.016096276326454273).epsilon(1e-13));
  CHECK(y1prime_algebraic(x, y1, y2, 0.0) == doctest::Approx(direct).epsilon(1e-10));
  // the returned root satisfies the constraint
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-0.6, 0.6), ux(0.02, 0.98);
  for (int t = 0; t < 200; ++t) {
    const double xx = ux(rng), a = u(rng), b = u(rng), w = u(rng);
    const double d = y1prime_algebraic(xx, a, b, w);
    const double om = 1 - xx * xx;
    const double scale = 12.0 * (1 + xx * xx) / (xx * om) * std::fabs(d) + 48.0 / (om * om);
    CHECK(std::fabs(constraint_phi(xx, a, d, b, w)) < 1e-13 * scale);
  }
}

TEST_CASE("branch domain error near phi -> 1/4") {
  // 4 phi - 1 < 0 with a large K^(-1/3) phi^(-4/3) drives the radicand negative
  const double x = 0.9, y2 = std::log(0.2), y1 = std::log(1e-3);
  CHECK(branch_radicand(x, y1, y2, 0.0) < 0.0);
  CHECK_THROWS_AS(y1prime_algebraic(x, y1, y2, 0.0), BranchDomainError);
  try {
    y1prime_algebraic(x, y1, y2, 0.0);
  } catch (const BranchDomainError& e) {
    CHECK(e.x() == x);
    CHECK(e.radicand() < 0.0);
  }
  CHECK_THROWS_AS(rhs({x, y1, y2, 0.0}), BranchDomainError);
}

TEST_CASE("constraint Phi and the equation identities") {
  CHECK(constraint_phi({0.5, 0, 0, 0}) == 0.0);
  const double x = 0.5, y1 = std::log(0.8), y2 = std::log(2.0);
  const double phi = constraint_phi(x, y1, 0.0, y2, 0.0);
  CHECK(phi == doctest::Approx(48.0 / 0.5625 * curvature_combination(2.0, 0.8)).epsilon(1e-13));
  CHECK(phi == doctest::Approx(0.6435919629).epsilon(1e-9));
  CHECK(std::fabs(constraint_phi({x, y1, y2, 0.0})) < 1e-13);

  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-1.0, 1.0), ux(0.02, 0.98);
  for (int t = 0; t < 200; ++t) {
    const double xx = ux(rng);
    const auto r = full_residuals(xx, u(rng), u(rng), u(rng), u(rng), u(rng), u(rng));
    const double scale = std::max({1.0, std::fabs(r[0]), std::fabs(r[3])});
    CHECK(std::fabs(r[0] - r[1] + r[3] / 3.0) < 1e-12 * scale);
  }
  const auto z = full_residuals(0.3, 0, 0, 0, 0, 0, 0);
  for (double v : z) CHECK(v == 0.0);
}

TEST_CASE("rhs structure") {
  const BergerDerivs h = rhs({0.4, 0, 0, 0});
  CHECK(h.dy1 == 0.0);
  CHECK(h.dy2 == 0.0);
  CHECK(h.dw == 0.0);
  // w = 0: y2'' = -32 (1-x^2)^-2 K^(-1/3) phi^(-1/3) (1/phi - 1), the sign of (phi - 1)
  for (double phi : {0.3, 0.6, 0.95})
    for (double x : {0.1, 0.5, 0.9}) {
      const double dw = rhs({x, std::log(0.9), std::log(phi), 0.0}).dw;
      const double om = 1 - x * x;
      CHECK(dw < 0.0);
      CHECK(dw == doctest::Approx(-32.0 / (om * om) * std::pow(0.9, -1.0 / 3.0) *
                                  std::pow(phi, -1.0 / 3.0) * (1.0 / phi - 1.0))
                      .epsilon(1e-13));
    }
  for (double phi : {1.1, 2.0}) CHECK(rhs({0.5, std::log(0.9), std::log(phi), 0.0}).dw > 0.0);
}

TEST_CASE("rhs on boundary and center jets matches the jet derivatives") {
  const Jet b = berger_boundary_jet({2.0, 0.8, 0.1});
  const double x = 1e-3;
  const JetValue v = eval_jet(b, x);
  const BergerDerivs d = rhs({x, v.y1, v.y2, v.dy2});
  CHECK(std::fabs(d.dy1 - v.dy1) < 1e-8);
  CHECK(std::fabs(d.dw - v.d2y2) < 1e-8);
  const double d2 = y1_second_derivative(x, v.y1, v.y2, v.dy2, d.dy1, d.dw);
  CHECK(std::fabs(d2 - v.d2y1) < 1e-8);

  const Jet c = berger_center_jet(-0.5);
  const double xc = 1.0 - 1e-3;
  const JetValue cv = eval_jet(c, xc);
  const BergerDerivs cd = rhs({xc, cv.y1, cv.y2, cv.dy2});
  CHECK(std::fabs(cd.dy1 - cv.dy1) < 1e-8);
  CHECK(std::fabs(cd.dw - cv.d2y2) < 1e-8);
}

TEST_CASE("integration reproduces the jet near the boundary") {
  const double eps = 1e-4;
  for (auto bd : {BergerBoundaryData{2.0, 0.8, 0.1}, BergerBoundaryData{0.5, 0.97, -8.5}}) {
    const Jet j = berger_boundary_jet(bd);
    const JetValue a = eval_jet(j, eps), b = eval_jet(j, 2 * eps);
    FlowOptions opt;
    opt.rtol = 1e-12;
    opt.atol = 1e-14;
    const Segment s = integrate({eps, a.y1, a.y2, a.dy2}, 2 * eps, opt);
    CHECK(std::fabs(s.end.y1 - b.y1) < 1e-10);
    CHECK(std::fabs(s.end.y2 - b.y2) < 1e-10);
    CHECK(std::fabs(s.end.w - b.dy2) < 1e-10);
  }
}

TEST_CASE("hyperbolic trajectory stays at zero") {
  const Segment s = integrate({1e-3, 0, 0, 0}, 0.999);
  CHECK(s.samples.size() >= 200);
  for (const auto& p : s.samples) {
    CHECK(std::fabs(p.y1) < 1e-11);
    CHECK(std::fabs(p.y2) < 1e-11);
    CHECK(std::fabs(p.w) < 1e-11);
  }
  CHECK(s.max_abs_phi < 1e-11);
}

TEST_CASE("integration samples, direction and constraint monitor") {
  const Jet j = berger_boundary_jet({2.0, 0.8, 0.1});
  const JetValue a = eval_jet(j, 1e-4);
  FlowOptions opt;
  opt.n_out = 250;
  const Segment s = integrate({1e-4, a.y1, a.y2, a.dy2}, 0.05, opt, 3);
  REQUIRE(s.samples.size() == 250);
  CHECK(s.samples.front().x == 1e-4);
  CHECK(s.samples.back().x == 0.05);
  for (std::size_t i = 1; i < s.samples.size(); ++i) CHECK(s.samples[i].x > s.samples[i - 1].x);
  CHECK(s.samples[7].segment == 3);
  CHECK(s.max_abs_phi < 100.0 * opt.rtol);
  const Segment back = integrate(s.end, 1e-4, opt);
  CHECK(std::fabs(back.end.y2 - a.y2) < 1e-8);
  CHECK(back.samples.front().x == 0.05);
  CHECK_THROWS_AS(integrate({0.0, 0, 0, 0}, 0.5), DomainError);
}

TEST_CASE("fixed-step convergence order") {
  // near-solution data for phi0 = 2 (arbitrary data leaves the branch domain)
  const Jet j = berger_boundary_jet({2.0, 0.97131796, 1.68806241});
  const JetValue a = eval_jet(j, 0.05);
  const BergerState s0{0.05, a.y1, a.y2, a.dy2};
  const BergerState ref = integrate_fixed_steps(s0, 0.5, 8192);
  double prev = 0;
  for (long n : {200L, 400L, 800L}) {
    const BergerState e = integrate_fixed_steps(s0, 0.5, n);
    const double err = std::fabs(e.y2 - ref.y2) + std::fabs(e.w - ref.w) + std::fabs(e.y1 - ref.y1);
    if (prev > 0) CHECK(prev / err >= 4.0);
    prev = err;
  }
}

TEST_CASE("finite-difference weights") {
  const std::vector<double> xs{0.0, 0.1, 0.25, 0.3, 0.5, 0.55, 0.7};
  std::vector<double> y, dy, d2y;
  for (double x : xs) y.push_back(x * x * x);
  finite_difference_derivatives(xs, y, dy, d2y);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    CHECK(dy[i] == doctest::Approx(3 * xs[i] * xs[i]).scale(1.0).epsilon(1e-12));
    CHECK(d2y[i] == doctest::Approx(6 * xs[i]).scale(1.0).epsilon(1e-11));
  }
}

TEST_CASE("diagnostics on the hyperbolic profile") {
  SolutionProfile p;
  for (int i = 0; i < 50; ++i) p.samples.push_back(make_sample(0.01 + 0.98 * i / 49.0, 0, 0, 0));
  const DiagnosticsReport r = diagnostics(p);
  CHECK(r.all_ok());
  CHECK(r.max_abs_phi == 0.0);
  CHECK(r.max_residual < 1e-14);
  CHECK(r.min_y1p == 0.0);
  CHECK(r.max_y1p == 0.0);
}
