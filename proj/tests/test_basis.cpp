// SPDX-License-Identifier: Apache-2.0
#include "catch2/catch_amalgamated.hpp"

#include "projdens/basis.hpp"
#include "projdens/error.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

using namespace projdens;
using Catch::Approx;

namespace {

// Direct libm evaluation, used as the reference for the fast paths.
double reference_phi(BasisKind kind, std::size_t k, double x) {
  const double pi = std::numbers::pi;
  if (k == 1) return 1.0;
  if (kind == BasisKind::cosine) return std::sqrt(2.0) * std::cos(double(k - 1) * pi * x);
  const double m = double(k / 2);
  return k % 2 == 0 ? std::sqrt(2.0) * std::cos(2.0 * pi * m * x)
                    : std::sqrt(2.0) * std::sin(2.0 * pi * m * x);
}

Errc code_of(auto &&f) {
  try {
    f();
  } catch (const Error &e) {
    return e.code();
  }
  FAIL("expected projdens::Error");
  return Errc::domain;
}

} // namespace

TEST_CASE("basis names round trip", "[basis]") {
  CHECK(parse_basis_kind("cosine") == BasisKind::cosine);
  CHECK(parse_basis_kind("trig") == BasisKind::trigonometric);
  CHECK(basis_kind_name(BasisKind::trigonometric) == "trig");
  CHECK(code_of([] { parse_basis_kind("legendre"); }) == Errc::config);
}

TEST_CASE("hand-computed basis values", "[basis]") {
  const double r2 = std::sqrt(2.0);
  BasisSystem cos_b(BasisKind::cosine);
  BasisSystem trig_b(BasisKind::trigonometric);

  CHECK(cos_b.evaluate(1, 0.3) == 1.0);
  CHECK(cos_b.evaluate(2, 0.0) == Approx(r2));
  CHECK(cos_b.evaluate(3, 0.5) == Approx(-r2));
  CHECK(cos_b.evaluate(2, 0.5) == 0.0); // exact zero at a half-integer multiple
  CHECK(cos_b.evaluate(2, 1.0) == Approx(-r2));

  CHECK(trig_b.evaluate(1, 0.9) == 1.0);
  CHECK(trig_b.evaluate(2, 0.25) == 0.0);
  CHECK(trig_b.evaluate(3, 0.25) == Approx(r2));
  CHECK(trig_b.evaluate(5, 0.125) == Approx(r2));
  CHECK(trig_b.evaluate(4, 0.5) == Approx(r2));
}

TEST_CASE("evaluate rejects bad input", "[basis]") {
  BasisSystem b(BasisKind::cosine, 3);
  CHECK(code_of([&] { b.evaluate(0, 0.5); }) == Errc::domain);
  CHECK(code_of([&] { b.evaluate(1, -0.01); }) == Errc::domain);
  CHECK(code_of([&] { b.evaluate(1, 1.5); }) == Errc::domain);
  CHECK(code_of([&] { b.evaluate(1, std::nan("")); }) == Errc::domain);
  CHECK(code_of([&] { b.evaluate(4, 0.5); }) == Errc::bounds);
  CHECK(code_of([] { BasisSystem(BasisKind::cosine, 0); }) == Errc::config);
}

TEST_CASE("sup bound", "[basis]") {
  CHECK(BasisSystem(BasisKind::cosine).sup_bound() == 2.0);
  CHECK(BasisSystem(BasisKind::trigonometric).sup_bound() == 2.0);
  CHECK(BasisSystem(BasisKind::cosine, 1).sup_bound() == 1.0);
  CHECK(BasisSystem(BasisKind::cosine, 2).sup_bound() == 2.0);
}

TEST_CASE("fill agrees with direct evaluation", "[basis]") {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (auto kind : {BasisKind::cosine, BasisKind::trigonometric}) {
    BasisSystem b(kind);
    for (std::size_t K : {1u, 2u, 7u, 64u, 513u, 4096u}) {
      std::vector<double> phi(K);
      for (int trial = 0; trial < 20; ++trial) {
        const double x = trial == 0 ? 0.0 : trial == 1 ? 1.0 : u(gen);
        b.fill(x, phi);
        double worst = 0.0;
        for (std::size_t k = 1; k <= K; ++k)
          worst = std::max(worst, std::fabs(phi[k - 1] - reference_phi(kind, k, x)));
        INFO("kind " << basis_kind_name(kind) << " K " << K << " x " << x);
        CHECK(worst < 1e-11);
      }
    }
  }
}

TEST_CASE("series equals the weighted sum of basis functions", "[basis]") {
  std::vector<double> c{1.0, 0.3, -0.2, 0.05, 0.0, 0.01};
  for (auto kind : {BasisKind::cosine, BasisKind::trigonometric}) {
    BasisSystem b(kind);
    for (double x : {0.0, 0.17, 0.5, 0.99, 1.0}) {
      double expect = 0.0;
      for (std::size_t k = 1; k <= c.size(); ++k) expect += c[k - 1] * reference_phi(kind, k, x);
      CHECK(b.series(x, c) == Approx(expect).margin(1e-14));
    }
  }
}
