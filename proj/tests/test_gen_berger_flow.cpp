#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "cce/gen_shooter.hpp"

using namespace cce;

TEST_CASE("round state satisfies the generalized system") {
  const auto r = residuals_gen(0.4, 0, 0, 0, 0, 0, 0, 0, 0, 0);
  for (double v : r) CHECK(v == 0.0);
  CHECK(y1prime_algebraic_gen(0.4, 0, 0, 0, 0, 0) == 0.0);
  CHECK(gen_curvature_term(0, 0, 0) == 0.0);
}

TEST_CASE("y3 = 0 reduces to the Berger equations") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> U(-0.5, 0.5);
  for (int t = 0; t < 20; ++t) {
    const double x = 0.05 + 0.9 * (U(rng) + 0.5);
    const double y1 = U(rng) * 0.2, d1 = U(rng), dd1 = U(rng), y2 = U(rng), d2 = U(rng),
                 dd2 = U(rng);
    const auto g = residuals_gen(x, y1, d1, dd1, y2, d2, dd2, 0, 0, 0);
    const auto b = full_residuals(x, y1, d1, dd1, y2, d2, dd2);
    CHECK(g[0] == doctest::Approx(b[0]).epsilon(1e-12));
    CHECK(g[1] == doctest::Approx(b[1]).epsilon(1e-12));
    CHECK(g[2] == doctest::Approx(b[2]).epsilon(1e-12));
    CHECK(std::fabs(g[3]) < 1e-12);
    CHECK(g[4] == doctest::Approx(b[3]).epsilon(1e-12));
    CHECK(gen_curvature_term(y1, y2, 0) == doctest::Approx(curvature_term(y1, y2)).epsilon(1e-14));
    const double w = 0.3 * d2;
    if (branch_radicand(x, y1, y2, w) > 0) {
      CHECK(y1prime_algebraic_gen(x, y1, y2, 0, w, 0) ==
            doctest::Approx(y1prime_algebraic(x, y1, y2, w)).epsilon(1e-14));
      const GenBergerDerivs gd = gen_rhs({x, y1, y2, 0, w, 0});
      const BergerDerivs bd = rhs({x, y1, y2, w});
      CHECK(gd.dw2 == doctest::Approx(bd.dw).epsilon(1e-12));
      CHECK(gd.dw3 == 0.0);
    }
  }
}

TEST_CASE("the constraint is the difference of the first two equations") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  for (int t = 0; t < 50; ++t) {
    const double x = 0.02 + 0.96 * 0.5 * (U(rng) + 1.0);
    double v[9];
    for (double& s : v) s = U(rng);
    const auto r = residuals_gen(x, v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7], v[8]);
    const double scale = std::max({1.0, std::fabs(r[0]), std::fabs(r[1]), std::fabs(r[4])});
    CHECK(std::fabs(r[4] + 3.0 * (r[0] - r[1])) < 1e-12 * scale);
  }
}

TEST_CASE("algebraic branch solves the constraint") {
  const double x = 0.3, y1 = -0.05, y2 = 0.2, y3 = -0.15, w2 = -0.4, w3 = 0.25;
  const double d1 = y1prime_algebraic_gen(x, y1, y2, y3, w2, w3);
  CHECK(std::fabs(gen_constraint_phi(x, y1, d1, y2, y3, w2, w3)) < 1e-12);
  CHECK_THROWS_AS(y1prime_algebraic_gen(0.9, std::log(1e-3), std::log(0.2), 0.0, 0.0, 0.0),
                  BranchDomainError);
}

TEST_CASE("generalized boundary jets") {
  const Jet round = gen_boundary_jet({1.0, 1.0, 1.0, 0.0, 0.0});
  for (int k = 0; k <= round.order; ++k) {
    CHECK(round.y1[k] == 0.0);
    CHECK(round.y2[k] == 0.0);
    CHECK(round.y3[k] == 0.0);
  }

  const Jet g = gen_boundary_jet({1.7, 1.0, 0.93, 0.4, 0.0}, 10);
  const Jet b = berger_boundary_jet({1.7, 0.93, 0.4}, 10);
  for (int k = 0; k <= 10; ++k) {
    CHECK(std::fabs(g.y1[k] - b.y1[k]) < 1e-12 * std::max(1.0, std::fabs(b.y1[k])));
    CHECK(std::fabs(g.y2[k] - b.y2[k]) < 1e-12 * std::max(1.0, std::fabs(b.y2[k])));
    CHECK(g.y3[k] == 0.0);
  }

  const GenBergerBoundaryData bd{1.3, 0.8, 0.99, 0.3, -0.2};
  const Jet j = gen_boundary_jet(bd, 10);
  CHECK(j.y1[1] == 0.0);
  CHECK(j.y2[1] == 0.0);
  CHECK(j.y3[1] == 0.0);
  CHECK(2.0 * j.y2[2] == doctest::Approx(gen_y2_second_derivative_at_boundary(1.3, 0.8, 0.99)));
  CHECK(2.0 * j.y3[2] == doctest::Approx(gen_y3_second_derivative_at_boundary(1.3, 0.8, 0.99)));
  // trace-free g^(3): log det has no cubic term
  CHECK(std::fabs(j.y1[3]) < 1e-14);
  const auto g3 = gen_g3_diagonal(bd);
  const auto I = gen_eigenvalues(j.y1[0], j.y2[0], j.y3[0]);
  CHECK(std::fabs(g3[0] / I[0] + g3[1] / I[1] + g3[2] / I[2]) < 1e-14);
  const GenSeriesResiduals sr = gen_series_residuals(j);
  double mag = 1.0;
  for (int k = 0; k < 10; ++k) {
    // round-off scale of the order-k residual
    mag = std::max({mag, std::fabs(j.y1[k + 1]), std::fabs(j.y2[k + 1]), std::fabs(j.y3[k + 1])});
    const double tol = 1e-14 * mag * (k + 2) * (k + 2);
    CHECK(std::fabs(sr.r1[k]) < tol);
    CHECK(std::fabs(sr.r2[k]) < tol);
    CHECK(std::fabs(sr.r3[k]) < tol);
    CHECK(std::fabs(sr.r4[k]) < tol);
  }
  const JetValue v = eval_jet(j, 1e-3);
  const double d1 = y1prime_algebraic_gen(1e-3, v.y1, v.y2, v.y3, v.dy2, v.dy3);
  CHECK(std::fabs(d1 - v.dy1) < 1e-6);
  const auto r = residuals_gen(1e-3, v.y1, v.dy1, v.d2y1, v.y2, v.dy2, v.d2y2, v.y3, v.dy3, v.d2y3);
  for (double x : r) CHECK(std::fabs(x) < 1e-6);

  CHECK_THROWS_AS(gen_boundary_jet({1.0, 1.0, 0.9, 0.0, 0.0}), DomainError);
  CHECK_THROWS_AS(gen_boundary_jet({-1.0, 1.0, 0.9, 0.0, 0.0}), DomainError);
  CHECK_THROWS_AS(gen_boundary_jet({1.2, 1.1, 1.2, 0.0, 0.0}), DomainError);
  CHECK_THROWS_AS(gen_boundary_jet(bd, 3), DomainError);
}

TEST_CASE("generalized center jets") {
  const Jet j = gen_center_jet(0.3, -0.2, 10);
  CHECK(j.y2[2] == doctest::Approx(0.15));
  CHECK(j.y3[2] == doctest::Approx(-0.1));
  for (int k = 0; k < 4; ++k) CHECK(std::fabs(j.y1[k]) < 1e-16);
  const GenSeriesResiduals sr = gen_series_residuals(j);
  // every equation, including the unused first one, holds order by order
  for (int k = 0; k < 10; ++k) {
    CHECK(std::fabs(sr.r1[k]) < 1e-12);
    CHECK(std::fabs(sr.r2[k]) < 1e-12);
    CHECK(std::fabs(sr.r3[k]) < 1e-12);
    CHECK(std::fabs(sr.r4[k]) < 1e-12);
  }
  const Jet b = berger_center_jet(0.3, 10);
  const Jet g = gen_center_jet(0.3, 0.0, 10);
  for (int k = 0; k <= 10; ++k) {
    CHECK(g.y1[k] == doctest::Approx(b.y1[k]).epsilon(1e-12));
    CHECK(g.y2[k] == doctest::Approx(b.y2[k]).epsilon(1e-12));
    CHECK(g.y3[k] == 0.0);
  }
}

TEST_CASE("integration reduces to the Berger flow") {
  const Jet b = berger_boundary_jet({2.0, 0.9713179618, 1.68806241}, 8);
  const JetValue v = eval_jet(b, 1e-4);
  FlowOptions fo;
  fo.rtol = 1e-12;
  fo.atol = 1e-20;
  fo.n_out = 50;
  const Segment s = integrate({1e-4, v.y1, v.y2, v.dy2}, 0.5, fo);
  const GenSegment g = gen_integrate({1e-4, v.y1, v.y2, 0.0, v.dy2, 0.0}, 0.5, fo);
  REQUIRE(s.samples.size() == g.samples.size());
  for (std::size_t i = 0; i < s.samples.size(); ++i) {
    CHECK(std::fabs(s.samples[i].y1 - g.samples[i].y1) < 1e-8);
    CHECK(std::fabs(s.samples[i].y2 - g.samples[i].y2) < 1e-8);
    CHECK(std::fabs(g.samples[i].y3) < 1e-9);
  }
  CHECK(g.max_abs_phi < 1e-8);
}

TEST_CASE("generalized shooting reproduces the Berger solution") {
  const BvpSolution b = solve_continued(2.0);
  const GenBvpSolution g = gen_solve_continued(2.0, 1.0);
  CHECK(std::fabs(g.params.K0 - b.params.K0) < 1e-6);
  CHECK(std::fabs(g.params.a2 - b.params.a) < 1e-6);
  CHECK(std::fabs(g.params.q2 - b.params.q) < 1e-6);
  const GenDiagnostics d = gen_diagnostics(g.profile);
  CHECK(d.max_abs_y3 < 1e-8);
  CHECK(d.max_abs_phi < 1e-8);
  CHECK(d.max_residual < 1e-6);
}

TEST_CASE("relabeling the eigenvalues maps solutions to solutions") {
  // boundary eigenvalues (1, 1.2, 1.45) and the cyclic relabeling (1.2, 1.45, 1)
  const double l[3] = {1.0, 1.2, 1.45};
  const GenBvpSolution s = gen_solve_continued(l[1] / l[0], l[2] / l[1]);
  const GenBvpSolution t = gen_solve_continued(l[2] / l[1], l[0] / l[2]);
  CHECK(s.match_defect < 1e-9);
  CHECK(t.match_defect < 1e-9);
  const GenDiagnostics d = gen_diagnostics(s.profile);
  CHECK(d.max_abs_phi < 1e-8);
  CHECK(d.max_residual < 1e-6);
  auto triple = [](const GenSolutionProfile& p) {
    const auto it = std::find_if(p.samples.begin(), p.samples.end(),
                                 [](const GenProfileSample& q) { return q.x == 0.5; });
    REQUIRE(it != p.samples.end());
    auto I = gen_eigenvalues(it->y1, it->y2, it->y3);
    std::sort(I.begin(), I.end());
    return I;
  };
  const auto a = triple(s.profile), c = triple(t.profile);
  for (int i = 0; i < 3; ++i) CHECK(std::fabs(a[i] - c[i]) < 1e-7);
  CHECK(s.params.K0 == doctest::Approx(t.params.K0).epsilon(1e-7));
}
