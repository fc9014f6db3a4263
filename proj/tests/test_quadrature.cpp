// SPDX-License-Identifier: Apache-2.0
#include "catch2/catch_amalgamated.hpp"

#include "projdens/basis.hpp"
#include "projdens/error.hpp"
#include "projdens/quadrature.hpp"

#include <cmath>
#include <numbers>

using namespace projdens;
using Catch::Approx;

TEST_CASE("Gauss-Legendre nodes and weights", "[quadrature]") {
  // 2-point rule on [-1,1]: nodes +-1/sqrt(3), weights 1 (mapped to one panel on [0,1])
  QuadratureRule rule(1, 2);
  REQUIRE(rule.nodes().size() == 2);
  double wsum = 0.0;
  for (double w : rule.weights()) wsum += w;
  CHECK(wsum == Approx(2.0).epsilon(1e-15));
  CHECK(std::fabs(rule.nodes()[0]) == Approx(1.0 / std::sqrt(3.0)).epsilon(1e-15));
}

TEST_CASE("exact on polynomials of degree 2n-1", "[quadrature]") {
  QuadratureRule rule(1, 5);
  // int_0^1 x^9 = 1/10
  CHECK(rule.integrate([](double x) { return std::pow(x, 9); }) == Approx(0.1).epsilon(1e-14));
  CHECK(rule.integrate([](double x) { return 3 * x * x; }, 1.0, 2.0) == Approx(7.0).epsilon(1e-14));
}

TEST_CASE("composite rule converges on smooth integrands", "[quadrature]") {
  QuadratureRule rule(16, 8);
  CHECK(rule.integrate([](double x) { return std::exp(x); }) ==
        Approx(std::exp(1.0) - 1.0).epsilon(1e-14));
  CHECK(rule.integrate([](double x) { return std::sin(std::numbers::pi * x); }) ==
        Approx(2.0 / std::numbers::pi).epsilon(1e-14));
}

TEST_CASE("gram entries", "[quadrature]") {
  QuadratureRule rule(64, 8);
  BasisSystem b(BasisKind::cosine);
  CHECK(gram_entry(b, 3, 3, rule).value == Approx(1.0).epsilon(1e-13));
  CHECK(std::fabs(gram_entry(b, 2, 5, rule).value) < 1e-13);
  CHECK(gram_entry(b, 2, 5, rule).resolved);
  CHECK_FALSE(gram_entry(b, 2, 17, rule).resolved);

  BasisSystem t(BasisKind::trigonometric);
  CHECK(std::fabs(gram_entry(t, 2, 3, rule).value) < 1e-13);
  CHECK(gram_entry(t, 9, 9, rule).value == Approx(1.0).epsilon(1e-13));
}

TEST_CASE("quadrature errors", "[quadrature]") {
  CHECK_THROWS_AS(QuadratureRule(0, 8), Error);
  CHECK_THROWS_AS(QuadratureRule(4, 0), Error);
  QuadratureRule rule(4, 4);
  try {
    gram_entry(BasisSystem(), 0, 1, rule);
    FAIL("expected error");
  } catch (const Error &e) {
    CHECK(e.code() == Errc::domain);
  }
}
