// SPDX-License-Identifier: Apache-2.0
#include "catch2/catch_amalgamated.hpp"

#include "projdens/density_model.hpp"
#include "projdens/error.hpp"
#include "projdens/quadrature.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

using namespace projdens;
using Catch::Approx;
using nlohmann::json;

namespace {

Errc code_of(auto &&f) {
  try {
    f();
  } catch (const Error &e) {
    return e.code();
  }
  FAIL("expected projdens::Error");
  return Errc::domain;
}

DensityModel model_file(const char *name) {
  return DensityModel::load(std::string(PROJDENS_MODELS_DIR) + "/" + name);
}

} // namespace

TEST_CASE("uniform model", "[densities]") {
  auto m = DensityModel::uniform();
  CHECK(m.coefficient(1) == 1.0);
  CHECK(m.coefficient(2) == 0.0);
  CHECK(m.tail_energy(0) == 1.0);
  CHECK(m.tail_energy(1) == 0.0);
  CHECK(m.density_at(0.3) == 1.0);
  CHECK(m.envelope_bound() == 1.0);
  CHECK(m.to_json()["coeffs"]["type"] == "uniform");
}

TEST_CASE("geometric tail energy has the closed form", "[densities]") {
  const double a = 0.2, r = 0.5;
  auto m = DensityModel(BasisSystem(), GeometricCoefficients{a, r});
  for (std::size_t N : {1u, 2u, 5u, 20u}) {
    double direct = 0.0;
    for (std::size_t k = N + 1; k < 400; ++k) direct += std::pow(a * std::pow(r, double(k)), 2);
    CHECK(m.tail_energy(N) == Approx(direct).epsilon(1e-13));
    CHECK(m.tail_energy(N) ==
          Approx(a * a * std::pow(r, 2.0 * (N + 1)) / (1 - r * r)).epsilon(1e-13));
  }
  CHECK(m.tail_energy(0) == Approx(1.0 + m.tail_energy(1)));
  CHECK(m.coefficient(3) == Approx(0.2 * 0.125));
}

TEST_CASE("power-law tails", "[densities]") {
  SECTION("with a cutoff the tail is a finite sum") {
    auto m = model_file("plaw1.json");
    double direct = 0.0;
    for (std::size_t k = 11; k <= 256; ++k) direct += 0.0144 / double(k * k);
    CHECK(m.tail_energy(10) == Approx(direct).epsilon(1e-13));
    CHECK(m.tail_energy(256) == 0.0);
    CHECK(m.coefficient(257) == 0.0);
    CHECK(m.coefficient(4) == Approx(0.12 / 4.0));
    CHECK(m.last_nonzero() == std::size_t{256});
  }
  SECTION("untruncated tail matches a long direct sum") {
    auto m = model_file("plaw3.json"); // c_k = 0.3 k^-2
    for (std::size_t N : {1u, 10u, 1000u, 8191u, 8192u, 50000u}) {
      // direct sum to 2e6 then the integral of k^-4 from 2e6 + 1/2
      double s = 0.0;
      const std::size_t K = 2'000'000;
      for (std::size_t k = K; k > N; --k) s += std::pow(double(k), -4.0);
      s += std::pow(K + 0.5, -3.0) / 3.0;
      CHECK(m.tail_energy(N) == Approx(0.09 * s).epsilon(1e-10));
    }
    CHECK_FALSE(m.has_pointwise());
    CHECK(code_of([&] { m.density_at(0.5); }) == Errc::model);
  }
  SECTION("gamma <= 1 without cutoff is rejected") {
    CHECK(code_of([] { DensityModel(BasisSystem(), PowerLawCoefficients{0.1, 1.0, 2, {}}); }) ==
          Errc::config);
  }
}

TEST_CASE("densities are nonnegative and integrate to one", "[densities]") {
  QuadratureRule rule(512, 8);
  for (const char *name : {"uniform.json", "plaw1.json", "geometric.json", "twocoef.json"}) {
    auto m = model_file(name);
    INFO(name);
    CHECK(rule.integrate([&](double x) { return m.density_at(x); }) == Approx(1.0).epsilon(1e-12));
    for (int i = 0; i <= 1000; ++i) CHECK(m.density_at(i / 1000.0) >= -1e-12);
  }
  // trig basis version of a two-term model
  DensityModel t(BasisSystem(BasisKind::trigonometric), ExplicitCoefficients{{{3, 0.4}}});
  CHECK(rule.integrate([&](double x) { return t.density_at(x); }) == Approx(1.0).epsilon(1e-12));
}

TEST_CASE("coefficients recovered by projection", "[densities]") {
  QuadratureRule rule(256, 8);
  auto m = model_file("geometric.json");
  BasisSystem b;
  for (std::size_t k : {1u, 2u, 3u, 6u}) {
    const double ck = rule.integrate([&](double x) { return m.density_at(x) * b.evaluate(k, x); });
    CHECK(ck == Approx(m.coefficient(k)).margin(1e-13));
  }
}

TEST_CASE("model validation", "[densities]") {
  auto make = [](const char *text) { return DensityModel::from_json(json::parse(text)); };
  // sqrt2 * 0.8 > 1
  CHECK(code_of([&] { make(R"({"coeffs":{"type":"explicit","terms":[[2,0.8]]}})"); }) ==
        Errc::config);
  CHECK(code_of([&] { make(R"({"coeffs":{"type":"explicit","terms":[[1,0.5]]}})"); }) ==
        Errc::config);
  CHECK(code_of([&] { make(R"({"coeffs":{"type":"explicit","terms":[[2,0.1],[2,0.1]]}})"); }) ==
        Errc::config);
  CHECK(code_of([&] { make(R"({"coeffs":{"type":"geometric","a":0.2,"r":1.5}})"); }) ==
        Errc::config);
  CHECK(code_of([&] { make(R"({"coeffs":{"type":"geometric","a":0.2,"r":0.5,"x":1}})"); }) ==
        Errc::schema);
  CHECK(code_of([&] { make(R"({"coeffs":{"type":"spline"}})"); }) == Errc::schema);
  CHECK(code_of([&] { make(R"({"basis":"hermite","coeffs":{"type":"uniform"}})"); }) ==
        Errc::schema);
  CHECK(code_of([&] { make(R"([1,2])"); }) == Errc::schema);
  CHECK(code_of([&] { DensityModel::load("/nonexistent/model.json"); }) == Errc::io);
  CHECK(code_of([] { DensityModel::uniform().coefficient(0); }) == Errc::domain);
  CHECK(code_of([] { DensityModel::uniform().density_at(1.2); }) == Errc::domain);
}

TEST_CASE("json round trip", "[densities]") {
  for (const char *name :
       {"uniform.json", "plaw1.json", "plaw3.json", "geometric.json", "twocoef.json"}) {
    auto m = model_file(name);
    auto again = DensityModel::from_json(m.to_json());
    CHECK(again.to_json() == m.to_json());
    for (std::size_t N : {0u, 1u, 3u, 100u}) CHECK(again.tail_energy(N) == m.tail_energy(N));
  }
  auto trig = DensityModel::from_json(
      json::parse(R"({"basis":"trig","coeffs":{"type":"geometric","a":0.1,"r":0.3}})"));
  CHECK(trig.basis().kind() == BasisKind::trigonometric);
  CHECK(trig.to_json()["basis"] == "trig");
}

TEST_CASE("monotone tail detection", "[densities]") {
  CHECK(model_file("plaw1.json").monotone_tail());
  CHECK(model_file("geometric.json").monotone_tail());
  DensityModel bumpy(BasisSystem(), ExplicitCoefficients{{{2, 0.1}, {3, 0.3}}});
  CHECK_FALSE(bumpy.monotone_tail());
}
