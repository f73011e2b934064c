#include <doctest.h>

#include <cmath>

#include "cce/collocation.hpp"
#include "cce/errors.hpp"

using namespace cce;

TEST_CASE("spectral differentiation is exact on polynomials") {
  const auto t = lobatto_nodes(10);
  CHECK(t.front() == -1.0);
  CHECK(t.back() == 1.0);
  for (std::size_t i = 1; i < t.size(); ++i) CHECK(t[i] > t[i - 1]);
  const Eigen::MatrixXd D = differentiation_matrix(t);
  Eigen::VectorXd f(t.size()), df(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    f(i) = std::pow(t[i], 7) - 2 * t[i] * t[i];
    df(i) = 7 * std::pow(t[i], 6) - 4 * t[i];
  }
  CHECK((D * f - df).lpNorm<Eigen::Infinity>() < 1e-12);
  const auto b = element_breaks(8, 1e-2);
  CHECK(b.front() == 1e-2);
  CHECK(b.back() == 1.0 - 1e-2);
  CHECK(b[1] - b[0] < b[4] - b[3]);  // graded toward the ends
}

TEST_CASE("collocation oracle") {
  CHECK_THROWS_AS(collocation_oracle(2.0, 6, 8), DomainError);

  const BvpSolution h = collocation_oracle(1.0, 10, 4);
  CHECK(std::fabs(h.params.K0 - 1.0) < 1e-9);
  CHECK(std::fabs(h.params.a) < 1e-9);
  CHECK(std::fabs(h.params.q) < 1e-9);

  const BvpSolution s = collocation_oracle(2.0, 12, 8);
  CHECK(s.oracle_defect < 1e-10);
  CHECK(s.params.K0 == doctest::Approx(0.97131796).epsilon(1e-7));
  CHECK(s.params.a == doctest::Approx(1.68806241).epsilon(1e-7));
  const BvpSolution s2 = collocation_oracle(2.0, 12, 16);
  CHECK(std::fabs(s2.params.K0 - s.params.K0) < 1e-8);
  CHECK(std::fabs(s2.params.a - s.params.a) < 1e-7);

  const auto& smp = s.profile.samples;
  for (std::size_t i = 1; i < smp.size(); ++i) CHECK(smp[i].x > smp[i - 1].x);
  CHECK(s.profile.max_abs_phi < 1e-8);
  CHECK(diagnostics(s.profile).all_ok());
}
