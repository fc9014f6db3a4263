// SPDX-License-Identifier: Apache-2.0
#include "catch2/catch_amalgamated.hpp"

#include "projdens/coefficients.hpp"
#include "projdens/confidence.hpp"
#include "projdens/density_model.hpp"
#include "projdens/error.hpp"
#include "projdens/estimator.hpp"
#include "projdens/sampling.hpp"

#include <cmath>
#include <numbers>

using namespace projdens;
using Catch::Approx;

TEST_CASE("confidence radius formula", "[confidence]") {
  // uniform model, N = 4, n = 1e4, alpha = 0.05: t = 2e ln 20
  auto r = confidence_radius(4, 10000, 2.0, 0.0, 0.05);
  CHECK(r.t == Approx(2.0 * std::numbers::e * std::log(20.0)));
  CHECK(r.radius_sq == Approx(0.01303).epsilon(1e-3));
  CHECK_FALSE(r.heuristic());

  // alpha = 1/e sits on the boundary where ln(1/alpha) = 1
  auto edge = confidence_radius(2, 100, 2.0, 0.01, std::exp(-1.0), RhoSource::adaptive);
  CHECK(edge.t == Approx(2.0 * std::numbers::e));
  CHECK(edge.radius_sq == Approx(0.01 + 0.04 * 2.0 * std::numbers::e));
  CHECK(edge.heuristic());
}

TEST_CASE("report JSON key order", "[confidence]") {
  auto r = confidence_radius(4, 10000, 2.0, 0.0, 0.05);
  const std::string text = r.to_json().dump();
  CHECK(text.rfind(R"({"N":4,"n":10000,"M":2.0,"rho":0.0,"alpha":0.05,"t":)", 0) == 0);
  CHECK(text.find(R"("rho_source":"oracle","heuristic":false})") != std::string::npos);
}

TEST_CASE("tail bounds", "[confidence]") {
  const double e = std::numbers::e;
  CHECK(tail_bound(2 * e, 2.0) == Approx(std::exp(-1.0)));
  CHECK(tail_bound(6 * e, 2.0) == Approx(std::exp(-3.0)));
  CHECK(recursive_tail_bound(2 * e * 1.5, 2.0, 1.5) == Approx(std::exp(-1.0)));
  CHECK_THROWS_AS(tail_bound(e, 2.0), Error);
  CHECK_THROWS_AS(recursive_tail_bound(10, 2.0, 0.5), Error);
  CHECK_THROWS_AS(recursive_tail_bound(10, 2.0, INFINITY), Error);
}

TEST_CASE("confidence input validation", "[confidence]") {
  auto code = [](auto &&f) {
    try {
      f();
    } catch (const Error &e) {
      return e.code();
    }
    return Errc{};
  };
  CHECK(code([] { confidence_radius(4, 100, 2.0, 0.0, 0.5); }) == Errc::domain);
  CHECK(code([] { confidence_radius(4, 100, 2.0, 0.0, 0.0); }) == Errc::domain);
  CHECK(code([] { confidence_radius(0, 100, 2.0, 0.0, 0.1); }) == Errc::domain);
  CHECK(code([] { confidence_radius(4, 100, 2.0, -1e-3, 0.1); }) == Errc::domain);
}

TEST_CASE("stated range", "[confidence]") {
  CHECK(deviation_in_stated_range(2, 5));
  CHECK_FALSE(deviation_in_stated_range(1, 100));
  CHECK_FALSE(deviation_in_stated_range(4, 5));
  CHECK_FALSE(deviation_in_stated_range(2, 4));
}

TEST_CASE("deviation statistic has the expected mean", "[confidence]") {
  // uniform model: Var phi_k = 1 for k >= 2, Var phi_1 = 0, so E[Delta] = (N-1)/(M N) = 3/8
  auto m = DensityModel::uniform();
  const std::size_t N = 4, n = 1000, R = 4000;
  double sum = 0.0, sum_sq = 0.0;
  for (std::size_t r = 0; r < R; ++r) {
    SampleStream s(m, derive_seed(5, r));
    CoefficientAccumulator acc(m.basis(), N);
    for (std::size_t i = 0; i < n; ++i) acc.push(s.next());
    auto est = ProjectionEstimate::build(acc.snapshot(), N);
    const double d = deviation_statistic(est, m);
    // definition, computed from the raw coefficients
    double direct = 0.0;
    for (std::size_t k = 2; k <= N; ++k) direct += std::pow(est.coefficients()[k - 1], 2);
    REQUIRE(d == Approx(direct * double(n) / (2.0 * N)).epsilon(1e-12));
    sum += d;
    sum_sq += d * d;
  }
  const double mean = sum / R;
  const double se = std::sqrt((sum_sq / R - mean * mean) / R);
  CHECK(std::fabs(mean - 0.375) < 4 * se);
}
