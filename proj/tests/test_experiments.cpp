// SPDX-License-Identifier: Apache-2.0
#include "catch2/catch_amalgamated.hpp"

#include "projdens/error.hpp"
#include "projdens/experiments.hpp"
#include "projdens/selection.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace projdens;
using Catch::Approx;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string &name) {
  auto dir = fs::temp_directory_path() / ("projdens_test_experiments_" + name);
  fs::remove_all(dir);
  return dir;
}

Errc code_of(auto &&f) {
  try {
    f();
  } catch (const Error &e) {
    return e.code();
  }
  return Errc{};
}

ExperimentPlan plan_from(const std::string &text) {
  return ExperimentPlan::from_json(json::parse(text), PROJDENS_MODELS_DIR);
}

} // namespace

TEST_CASE("n grid parsing", "[experiments]") {
  CHECK(parse_n_grid("1e2:1e4:log10") == std::vector<std::uint64_t>{100, 1000, 10000});
  CHECK(parse_n_grid("1e2:1e3:log10/2") == std::vector<std::uint64_t>{100, 316, 1000});
  CHECK(parse_n_grid("500,20,20,100") == std::vector<std::uint64_t>{20, 100, 500});
  CHECK(default_n_grid().size() == 9);
  CHECK(code_of([] { parse_n_grid("1e2:1e4"); }) == Errc::schema);
  CHECK(code_of([] { parse_n_grid("1e2:1e4:lin"); }) == Errc::schema);
  CHECK(code_of([] { parse_n_grid("10,abc"); }) == Errc::schema);
  CHECK(code_of([] { parse_n_grid("0,5"); }) == Errc::schema);
}

TEST_CASE("rule names", "[experiments]") {
  for (auto r : {OrderRule::fixed, OrderRule::batch_optimal, OrderRule::threshold,
                 OrderRule::recursive_oracle, OrderRule::recursive_plugin, OrderRule::adaptive})
    CHECK(parse_order_rule(order_rule_name(r)) == r);
  CHECK(code_of([] { parse_order_rule("oracle"); }) == Errc::schema);
  CHECK(is_deterministic(OrderRule::threshold));
  CHECK_FALSE(is_deterministic(OrderRule::adaptive));
}

TEST_CASE("plan parsing", "[experiments]") {
  auto p = plan_from(R"({"name":"t","model_file":"geometric.json","n_grid":"100,1000",
                          "rule":"N0","replications":100,"seed":3,"tables":["risk","rate"]})");
  CHECK(p.name == "t");
  CHECK(p.n_grid == std::vector<std::uint64_t>{100, 1000});
  CHECK(p.rule == OrderRule::batch_optimal);
  CHECK(deterministic_order(p, 1000) == batch_optimal_order(p.model, 1000));
  // the resolved plan re-parses to the same plan
  auto again = ExperimentPlan::from_json(p.to_json());
  CHECK(again.to_json() == p.to_json());

  CHECK(code_of([] { plan_from(R"({"model_file":"geometric.json","bogus":1})"); }) ==
        Errc::schema);
  CHECK(code_of([] { plan_from(R"({"n_grid":"10"})"); }) == Errc::schema);
  CHECK(code_of([] { plan_from(R"({"model_file":"missing.json"})"); }) == Errc::io);
  CHECK(code_of([] { plan_from(R"({"model_file":"uniform.json","replications":0})"); }) ==
        Errc::schema);
}

TEST_CASE("risk table", "[experiments]") {
  auto p = plan_from(R"({"model_file":"twocoef.json","n_grid":"50,200","rule":"fixed","N":2,
                          "replications":400,"seed":9})");
  const auto rows = mc_risk(p, 1);
  REQUIRE(rows.size() == 2);
  for (const auto &r : rows) {
    // with all nonzero coefficients kept, E||f_hat - f||^2 = (Var phi_2)/n
    CHECK(r.N == 2.0);
    CHECK(r.risk_bound == Approx(4.0 / double(r.n)));
    CHECK(r.mean_l2 <= r.risk_bound + 3 * r.stderr_l2);
    CHECK(r.stderr_l2 > 0.0);
  }
  p.replications = 10;
  CHECK(code_of([&] { mc_risk(p, 1); }) == Errc::domain);
}

TEST_CASE("rate study", "[experiments]") {
  auto g = DensityModel::load(std::string(PROJDENS_MODELS_DIR) + "/geometric.json");
  auto s = rate_study(g, parse_n_grid("1e2:1e6:log10"));
  CHECK(s.points.size() == 5);
  CHECK(s.ratio_min > 0.0);
  CHECK(s.ratio_max >= s.ratio_min);
  CHECK(code_of([&] { rate_study(g, {100, 1000}); }) == Errc::domain);
}

TEST_CASE("tail and coverage tables", "[experiments]") {
  auto p = plan_from(R"({"model_file":"uniform.json","n_grid":"60","rule":"fixed","N":3,
                          "replications":10000,"seed":4,"t_multiples":[1,2]})");
  const auto tail = mc_tail(p, 1);
  REQUIRE(tail.size() == 2);
  CHECK(tail[0].t == Approx(2 * std::exp(1.0)));
  CHECK(tail[0].Q == 1.0);
  for (const auto &r : tail) CHECK(r.exceedance <= r.bound + 2 * r.stderr_p);

  const auto cov = mc_coverage(p, 1);
  REQUIRE(cov.size() == 3);
  for (const auto &r : cov) CHECK(r.coverage >= 1 - r.alpha - 2 * r.stderr_p);

  p.rule = OrderRule::adaptive;
  CHECK(code_of([&] { mc_coverage(p, 1); }) == Errc::config);
}

TEST_CASE("select table", "[experiments]") {
  auto m = DensityModel::load(std::string(PROJDENS_MODELS_DIR) + "/plaw1.json");
  const auto rows = select_table(m, {100, 1000, 3000}, 7);
  REQUIRE(rows.size() == 3);
  auto trace = recursive_order_trace(m, 3000);
  for (const auto &r : rows) {
    CHECK(r.N0 == batch_optimal_order(m, r.n));
    CHECK(r.Y_oracle == trace.at(r.n));
    CHECK(r.A_star == Approx(optimal_risk(m, r.n)));
    REQUIRE(r.L.has_value());
    CHECK(*r.L == threshold_order(m, r.n));
  }
  CHECK(rows[2].Q_running == Approx(q_factor(m, trace, 1, 3000).value));
  CHECK(rows[0].Q_running <= rows[1].Q_running);
  std::ostringstream out;
  write_select_csv(out, rows);
  CHECK(out.str().rfind("n,N0,L,Y_oracle,Y_plugin,tau_argmin,A_star,Q_running\n100,", 0) == 0);
}

TEST_CASE("run_plan output is independent of thread count", "[experiments]") {
  auto p = plan_from(R"({"name":"dup","model_file":"geometric.json","n_grid":"20,80",
                          "rule":"recursive_plugin","replications":200,"seed":11,
                          "tables":["risk","duel"],"k_max":64})");
  const auto a = scratch("serial"), b = scratch("parallel");
  const auto ra = run_plan(p, a, 1);
  run_plan(p, b, 3);
  REQUIRE(ra.outputs.size() == 3);
  for (const auto &f : {"risk.csv", "duel.csv", "manifest.json"})
    CHECK(slurp(a / f) == slurp(b / f));
  // replay from the manifest
  const auto c = scratch("replay");
  run_plan(ExperimentPlan::load(a / "manifest.json"), c, 2);
  CHECK(slurp(a / "risk.csv") == slurp(c / "risk.csv"));
  CHECK(slurp(a / "manifest.json") == slurp(c / "manifest.json"));
  auto manifest = json::parse(slurp(a / "manifest.json"));
  CHECK(manifest["version"] == std::string(library_version()));
  CHECK(manifest["outputs"] == json::array({"risk.csv", "duel.csv"}));
  for (const auto &d : {a, b, c}) fs::remove_all(d);
}
