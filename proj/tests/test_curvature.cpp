#include <doctest.h>

#include <cmath>
#include <random>

#include "cce/curvature.hpp"
#include "cce/shooter.hpp"

using namespace cce;

namespace {

SolutionProfile hyperbolic_profile(int n) {
  SolutionProfile p;
  p.params = {1.0, 1.0, 0.0};
  for (int i = 0; i < n; ++i) {
    ProfileSample s;
    s.x = 1e-4 + (1.0 - 2e-4) * i / (n - 1);
    p.samples.push_back(s);
  }
  return p;
}

}  // namespace

TEST_CASE("hyperbolic metric has constant curvature -1") {
  const MetricProfile4D m = assemble(hyperbolic_profile(101));
  REQUIRE(!m.samples.empty());
  CHECK(m.samples.front().r >= 1e-3);
  for (const auto& fs : m.samples)
    for (int i = 0; i < 3; ++i) CHECK(fs.f[i] == std::sinh(fs.r));
  CHECK(einstein_residual_4d(m) < 1e-10);
  const auto range = sectional_range(m, 100, 7);
  CHECK(range.first == doctest::Approx(-1.0).epsilon(1e-8));
  CHECK(range.second == doctest::Approx(-1.0).epsilon(1e-8));
  CHECK(std::fabs(range.first + 1.0) < 1e-8);
  CHECK(std::fabs(range.second + 1.0) < 1e-8);
}

TEST_CASE("frame identities on a solved profile") {
  const BvpSolution s = solve_continued(1.25);
  const MetricProfile4D m = assemble(s.profile);
  REQUIRE(m.samples.size() > 50);
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<std::size_t> pick(0, m.samples.size() - 1);
  for (int t = 0; t < 20; ++t) {
    const FrameSample& fs = m.samples[pick(rng)];
    const FrameCurvature fc = frame_curvature(fs);
    const auto& R = fc.R;
    // radial planes: K(e0, e_i) = -f_i''/f_i
    for (int i = 0; i < 3; ++i) {
      const double k = sectional_curvature(R, Eigen::Vector4d::Unit(0), Eigen::Vector4d::Unit(i + 1));
      CHECK(k == doctest::Approx(-fs.fpp[i] / fs.f[i]).epsilon(1e-9));
    }
    double scale = 1.0;
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b)
        for (int c = 0; c < 4; ++c)
          for (int d = 0; d < 4; ++d) scale = std::max(scale, std::fabs(R[a][b][c][d]));
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b)
        for (int c = 0; c < 4; ++c)
          for (int d = 0; d < 4; ++d) {
            CHECK(std::fabs(R[a][b][c][d] + R[b][a][c][d]) < 1e-12 * scale);
            CHECK(std::fabs(R[a][b][c][d] + R[a][b][d][c]) < 1e-12 * scale);
            CHECK(std::fabs(R[a][b][c][d] - R[c][d][a][b]) < 1e-10 * scale);
            CHECK(std::fabs(R[a][b][c][d] + R[b][c][a][d] + R[c][a][b][d]) < 1e-10 * scale);
          }
    CHECK((fc.Ric - fc.Ric.transpose()).cwiseAbs().maxCoeff() < 1e-10 * scale);
  }
}

TEST_CASE("solved profiles are Einstein and asymptotically hyperbolic") {
  for (double phi0 : {1.25, 0.9}) {
    const BvpSolution s = solve_continued(phi0);
    const CurvatureReport rep = curvature_report(s.profile, 100, 3);
    CHECK(rep.einstein_residual < 1e-6);
    CHECK(rep.frame_plane_deviation_far < 1e-3);
    CHECK(rep.r_min >= 1e-3);
    CHECK(rep.sec_min <= rep.sec_max);
    if (phi0 == 0.9) {
      CHECK(rep.sec_max < 0.0);
      CHECK(rep.flag_nonpositive);
    }
  }
}

TEST_CASE("a corrupted profile is not Einstein") {
  const SolutionProfile good = solve_continued(1.25).profile;
  // y2 scaled as a function, derivatives included
  SolutionProfile p = good;
  for (auto& s : p.samples) {
    s.y2 *= 1.01;
    s.w *= 1.01;
    s.dw *= 1.01;
  }
  CHECK(einstein_residual_4d(assemble(p)) > 1e-3);
  // y2 values scaled with stale derivatives
  SolutionProfile v = good;
  for (auto& s : v.samples) s.y2 *= 1.01;
  CHECK(einstein_residual_4d(assemble(v)) > 1e-3);
}

TEST_CASE("squashed profile keeps the Berger form") {
  const MetricProfile4D m = assemble(solve_continued(2.0).profile);
  for (const auto& fs : m.samples) {
    CHECK(fs.f[1] == fs.f[2]);
    CHECK(fs.f[0] < fs.f[1]);
  }
}

TEST_CASE("sectional range is reproducible for a fixed seed") {
  const MetricProfile4D m = assemble(solve_continued(0.8).profile);
  const auto a = sectional_range(m, 100, 11);
  const auto b = sectional_range(m, 100, 11);
  CHECK(a.first == b.first);
  CHECK(a.second == b.second);
  CHECK_THROWS_AS(sectional_range(m, 99, 11), DomainError);
  CHECK_THROWS_AS(assemble(SolutionProfile{{ProfileSample{}}}), DomainError);
}
