#include <doctest.h>

#include <atomic>
#include <cmath>

#include "cce/shooter.hpp"

using namespace cce;

namespace {

double sup(const Eigen::Vector3d& v) { return v.lpNorm<Eigen::Infinity>(); }

}  // namespace

TEST_CASE("shooting residual at and near the hyperbolic point") {
  CHECK(sup(shooting_residual(1.0, {1.0, 0.0, 0.0})) == 0.0);
  const Eigen::Vector3d r = shooting_residual(1.0, {1.0, 0.01, 0.0});
  CHECK(sup(r) > 1e-3);
  // a only enters through the odd y2 coefficients: y1 is perturbed at second order
  CHECK(std::fabs(r(0)) < 0.01 * std::fabs(r(1)));
  CHECK(std::fabs(r(0)) < 0.01 * std::fabs(r(2)));
  CHECK_FALSE(is_penalty(r));
}

TEST_CASE("penalty encoding") {
  const Eigen::Vector3d neg = shooting_residual(2.0, {-0.5, 0.0, 0.0});
  CHECK(is_penalty(neg));
  CHECK(neg(0) >= kPenalty);
  // wildly wrong parameters leave the branch domain before the match point
  const Eigen::Vector3d far = shooting_residual(0.5, {0.6, 80.0, 30.0});
  CHECK(is_penalty(far));
  CHECK(far(0) == far(1));
  CHECK(far.allFinite());
}

TEST_CASE("solve returns the hyperbolic metric for phi0 = 1") {
  for (auto g : {ShootingParams{0.9, 0.05, 0.05}, ShootingParams{0.97, -0.3, 0.2},
                 ShootingParams{1.0, 0.5, -0.4}}) {
    const BvpSolution s = solve(1.0, g);
    CHECK(std::fabs(s.params.K0 - 1.0) < 1e-9);
    CHECK(std::fabs(s.params.a) < 1e-9);
    CHECK(std::fabs(s.params.q) < 1e-9);
    CHECK(s.match_defect < 1e-9);
    double m = 0;
    for (const auto& p : s.profile.samples) m = std::max({m, std::fabs(p.y1), std::fabs(p.y2)});
    CHECK(m < 1e-10);
  }
}

TEST_CASE("continuation solve for phi0 = 1.1 and 2") {
  const BvpSolution s = solve_continued(1.1);
  CHECK(s.params.K0 < 1.0);
  CHECK(s.match_defect < 1e-9);

  const BvpSolution t = solve_continued(2.0);
  CHECK(t.params.K0 > k0_lower_bound(2.0));
  CHECK(t.params.K0 > 0.794);
  CHECK(t.params.K0 == doctest::Approx(0.97131796).epsilon(1e-7));
  CHECK(t.params.a == doctest::Approx(1.68806241).epsilon(1e-7));
  CHECK(t.params.q == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(sup(shooting_residual(2.0, t.params)) < 1e-9);

  const auto& smp = t.profile.samples;
  REQUIRE(smp.size() >= 200);
  CHECK(smp.front().x == doctest::Approx(1e-4));
  CHECK(smp.back().x == doctest::Approx(1.0 - 1e-4));
  for (std::size_t i = 1; i < smp.size(); ++i) CHECK(smp[i].x > smp[i - 1].x);
  CHECK(smp.front().segment == 0);
  CHECK(smp.back().segment == 1);

  const DiagnosticsReport d = diagnostics(t.profile);
  CHECK(d.all_ok());
  CHECK(d.max_abs_phi < 1e-8);
  CHECK(d.max_residual < 1e-6);
  for (const auto& p : smp) {
    CHECK(p.w < 0.0);
    CHECK(std::exp(p.y2) > 1.0);
    CHECK(std::exp(p.y2) < 2.0);
  }
}

TEST_CASE("solve failure carries the best iterate") {
  ShooterOptions o;
  o.max_iter = 1;
  o.match_stages.clear();
  try {
    solve(2.0, {0.85, -6.0, -1.5}, o);
    FAIL("expected SolveError");
  } catch (const SolveError& e) {
    CHECK(e.best().phi0 == 2.0);
    CHECK(e.best().match_defect > o.tol);
  }
}

TEST_CASE("continuation scan") {
  const auto one = continuation_scan({1.0});
  REQUIRE(one.size() == 1);
  CHECK(one[0].converged);
  CHECK(one[0].params.K0 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::fabs(one[0].params.a) < 1e-12);

  const std::vector<double> grid{0.8, 0.9, 1.0, 1.1, 1.2};
  const auto rows = continuation_scan(grid);
  REQUIRE(rows.size() == grid.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].phi0 == grid[i]);
    CHECK(rows[i].converged);
    CHECK(rows[i].diagnostics.all_ok());
  }
  CHECK(rows[0].params.K0 < rows[1].params.K0);
  CHECK(rows[1].params.K0 < rows[2].params.K0);
  CHECK(rows[3].params.K0 < rows[2].params.K0);
  CHECK(rows[4].params.K0 < rows[3].params.K0);
  CHECK(rows[0].params.a < 0.0);
  CHECK(rows[4].params.a > 0.0);
}

TEST_CASE("uniqueness probe at the hyperbolic point is deterministic") {
  const ProbeReport a = uniqueness_probe(1.0, 8, 0.5, 123);
  const ProbeReport b = uniqueness_probe(1.0, 8, 0.5, 123, {}, 1);
  REQUIRE(a.starts.size() == 8);
  CHECK(a.converged >= 6);
  REQUIRE(a.clusters.size() == 1);
  CHECK(std::fabs(a.clusters[0].K0 - 1.0) < 1e-9);
  CHECK(std::fabs(a.clusters[0].a) < 1e-9);
  CHECK(b.clusters.size() == a.clusters.size());
  for (int i = 0; i < 8; ++i) {
    CHECK(a.starts[i].guess.K0 == b.starts[i].guess.K0);
    CHECK(a.starts[i].result.a == b.starts[i].result.a);
    CHECK(a.starts[i].converged == b.starts[i].converged);
  }
  // Latin hypercube: one start per stratum in each coordinate
  std::vector<int> hits(8, 0);
  for (const auto& s : a.starts) ++hits[static_cast<int>((s.guess.q / 1.0 + 1.0) / 2.0 * 8)];
  for (int h : hits) CHECK(h == 1);
}

TEST_CASE("parallel_for covers every index once") {
  std::vector<std::atomic<int>> hits(100);
  parallel_for(100, 4, [&](int i) { ++hits[i]; });
  for (auto& h : hits) CHECK(h.load() == 1);
  CHECK_THROWS(parallel_for(5, 2, [](int i) {
    if (i == 3) throw std::runtime_error("boom");
  }));
}
