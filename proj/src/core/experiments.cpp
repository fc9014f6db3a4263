// SPDX-License-Identifier: Apache-2.0
#include "projdens/experiments.hpp"

#include "projdens/coefficients.hpp"
#include "projdens/confidence.hpp"
#include "projdens/error.hpp"
#include "projdens/estimator.hpp"
#include "projdens/sampling.hpp"
#include "projdens/selection.hpp"
#include "format.hpp"
#include "replicate.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <numeric>
#include <ostream>
#include <sstream>

namespace projdens {

using nlohmann::json;
using nlohmann::ordered_json;
using detail::format_double;

namespace {

constexpr std::string_view kVersion = "0.1.0";

[[noreturn]] void plan_error(const std::string &msg) {
  throw Error(Errc::schema, "experiment plan: " + msg);
}

double parse_real(std::string_view s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw Error(Errc::schema, "bad number '" + std::string(s) + "' in n grid");
  return v;
}

std::uint64_t to_count(double v) {
  if (!(v >= 1.0) || v > 1e15 || !std::isfinite(v))
    throw Error(Errc::schema, "n grid values must lie in [1, 1e15]");
  return static_cast<std::uint64_t>(std::llround(v));
}

std::vector<std::uint64_t> normalise_grid(std::vector<std::uint64_t> grid) {
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  if (grid.empty()) throw Error(Errc::schema, "n grid is empty");
  return grid;
}

struct Moments {
  double mean;
  double stderr_;
};

Moments moments(const std::vector<double> &xs) {
  const double R = static_cast<double>(xs.size());
  double sum = 0.0;
  for (double x : xs) sum += x;
  const double mean = sum / R;
  if (xs.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / (R - 1.0) / R)};
}

double binomial_stderr(double p, std::size_t R) {
  return std::sqrt(p * (1.0 - p) / static_cast<double>(R));
}

double median(std::vector<double> xs) {
  std::erase_if(xs, [](double v) { return std::isnan(v); });
  if (xs.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(xs.begin(), xs.end());
  const std::size_t m = xs.size() / 2;
  return xs.size() % 2 ? xs[m] : 0.5 * (xs[m - 1] + xs[m]);
}

// Per-replication driver: draws max(n grid) samples with the replication
// seed and calls observe(r, grid_index, accumulator, plugin_Y) every time the
// sample size reaches a grid point. plugin_Y is Y(n) of the plug-in rule when
// track_plugin is set.
template <class Observe>
void simulate(const ExperimentPlan &plan, std::size_t k_max, bool track_plugin,
              unsigned threads, Observe &&observe) {
  const auto &grid = plan.n_grid;
  const std::uint64_t n_max = grid.back();
  const double M = plan.model.basis().sup_bound();
  detail::for_each_replication(plan.replications, threads, [&](std::size_t r) {
    SampleStream stream(plan.model, derive_seed(plan.seed, r));
    CoefficientAccumulator acc(plan.model.basis(), k_max);
    PluginOrderTracker tracker(M);
    std::size_t gi = 0;
    for (std::uint64_t n = 1; n <= n_max; ++n) {
      acc.push(stream.next());
      if (n == grid[gi]) {
        observe(r, gi, acc, tracker.current());
        ++gi;
      }
      if (track_plugin && n < n_max) tracker.advance(acc);
    }
  });
}

std::vector<std::size_t> grid_orders(const ExperimentPlan &plan) {
  std::vector<std::size_t> orders;
  orders.reserve(plan.n_grid.size());
  for (auto n : plan.n_grid) orders.push_back(deterministic_order(plan, n));
  return orders;
}

std::size_t resolve_k_max(const ExperimentPlan &plan, std::size_t needed) {
  if (plan.k_max) {
    if (*plan.k_max < needed)
      throw Error(Errc::bounds, "plan k_max " + std::to_string(*plan.k_max) +
                                    " is below the largest order used (" +
                                    std::to_string(needed) + ")");
    return *plan.k_max;
  }
  return std::max<std::size_t>(needed, 1);
}

std::size_t data_driven_k_max(const ExperimentPlan &plan) {
  return plan.k_max ? *plan.k_max : CoefficientAccumulator::default_k_max(plan.n_max());
}

void require_replications(const ExperimentPlan &plan, std::size_t lo, const char *what) {
  if (plan.replications < lo)
    throw Error(Errc::domain, std::string(what) + " needs at least " + std::to_string(lo) +
                                  " replications");
}

std::size_t order_for(OrderRule rule, const ExperimentPlan &plan, std::uint64_t n,
                      const CoefficientAccumulator &acc, std::size_t plugin_Y,
                      std::size_t fixed) {
  switch (rule) {
  case OrderRule::recursive_plugin: return plugin_Y;
  case OrderRule::adaptive: return adaptive_order(acc.snapshot()).order;
  default: (void)plan; (void)n; return fixed;
  }
}

OrderTrace oracle_trace_for(const ExperimentPlan &plan) {
  return recursive_order_trace(plan.model, std::max(plan.n_max(), plan.q_n_max.value_or(0)));
}

} // namespace

std::vector<std::uint64_t> parse_n_grid(std::string_view text) {
  std::vector<std::uint64_t> grid;
  if (text.find(':') != std::string_view::npos) {
    const auto p1 = text.find(':');
    const auto p2 = text.find(':', p1 + 1);
    if (p2 == std::string_view::npos)
      throw Error(Errc::schema, "n grid range must be start:stop:log10[/k]");
    const double lo = parse_real(text.substr(0, p1));
    const double hi = parse_real(text.substr(p1 + 1, p2 - p1 - 1));
    const std::string_view scale = text.substr(p2 + 1);
    std::size_t per_decade = 1;
    if (scale.rfind("log10", 0) != 0)
      throw Error(Errc::schema, "n grid spacing must be log10 or log10/<k>");
    if (scale.size() > 5) {
      if (scale[5] != '/') throw Error(Errc::schema, "n grid spacing must be log10 or log10/<k>");
      per_decade = static_cast<std::size_t>(parse_real(scale.substr(6)));
      if (per_decade == 0) throw Error(Errc::schema, "points per decade must be >= 1");
    }
    if (!(lo >= 1.0 && hi >= lo)) throw Error(Errc::schema, "n grid range must satisfy 1 <= start <= stop");
    const double a = std::log10(lo), b = std::log10(hi);
    const auto steps = static_cast<std::size_t>(std::floor((b - a) * per_decade + 1e-9));
    for (std::size_t i = 0; i <= steps; ++i)
      grid.push_back(to_count(std::pow(10.0, a + static_cast<double>(i) / per_decade)));
  } else {
    std::size_t pos = 0;
    while (pos <= text.size()) {
      const auto comma = text.find(',', pos);
      const auto item = text.substr(pos, comma == std::string_view::npos ? text.npos : comma - pos);
      grid.push_back(to_count(parse_real(item)));
      if (comma == std::string_view::npos) break;
      pos = comma + 1;
    }
  }
  return normalise_grid(std::move(grid));
}

std::vector<std::uint64_t> default_n_grid() { return parse_n_grid("1e2:1e6:log10/2"); }

std::string_view order_rule_name(OrderRule rule) noexcept {
  switch (rule) {
  case OrderRule::fixed: return "fixed";
  case OrderRule::batch_optimal: return "N0";
  case OrderRule::threshold: return "threshold";
  case OrderRule::recursive_oracle: return "recursive_oracle";
  case OrderRule::recursive_plugin: return "recursive_plugin";
  case OrderRule::adaptive: return "adaptive";
  }
  return "fixed";
}

OrderRule parse_order_rule(std::string_view name) {
  std::string s(name);
  std::replace(s.begin(), s.end(), '-', '_');
  if (s == "fixed") return OrderRule::fixed;
  if (s == "N0" || s == "n0" || s == "batch_optimal") return OrderRule::batch_optimal;
  if (s == "threshold" || s == "L") return OrderRule::threshold;
  if (s == "recursive_oracle") return OrderRule::recursive_oracle;
  if (s == "recursive_plugin") return OrderRule::recursive_plugin;
  if (s == "adaptive") return OrderRule::adaptive;
  throw Error(Errc::schema, "unknown order rule '" + std::string(name) + "'");
}

bool is_deterministic(OrderRule rule) noexcept {
  return rule != OrderRule::recursive_plugin && rule != OrderRule::adaptive;
}

std::string_view table_name(TableKind kind) noexcept {
  switch (kind) {
  case TableKind::risk: return "risk";
  case TableKind::rate: return "rate";
  case TableKind::tail: return "tail";
  case TableKind::coverage: return "coverage";
  case TableKind::duel: return "duel";
  }
  return "risk";
}

std::string_view library_version() noexcept { return kVersion; }

// ---------------------------------------------------------------------------
// Plan parsing

ExperimentPlan ExperimentPlan::from_json(const json &doc, const std::filesystem::path &base_dir) {
  if (!doc.is_object()) plan_error("top level must be an object");
  static const std::vector<std::string> allowed = {
      "name", "model", "model_file", "basis", "n_grid", "rule", "N", "replications", "seed",
      "tables", "t_multiples", "tail_mode", "q_n_max", "alphas", "rho_inflation", "k_max"};
  for (const auto &[key, _] : doc.items())
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      plan_error("unknown key '" + key + "'");

  ExperimentPlan plan;
  try {
    if (doc.contains("name")) plan.name = doc.at("name").get<std::string>();

    json model_doc;
    if (doc.contains("model") == doc.contains("model_file"))
      plan_error("exactly one of 'model' and 'model_file' is required");
    if (doc.contains("model")) {
      model_doc = doc.at("model");
    } else {
      std::filesystem::path p = doc.at("model_file").get<std::string>();
      if (p.is_relative()) p = base_dir / p;
      std::ifstream in(p);
      if (!in) throw Error(Errc::io, "cannot open model file '" + p.string() + "'");
      try {
        model_doc = json::parse(in);
      } catch (const json::parse_error &e) {
        throw Error(Errc::schema, "model file '" + p.string() + "': " + e.what());
      }
    }
    if (doc.contains("basis")) model_doc["basis"] = doc.at("basis");
    plan.model = DensityModel::from_json(model_doc);

    if (doc.contains("n_grid")) {
      const auto &g = doc.at("n_grid");
      if (g.is_string()) {
        plan.n_grid = parse_n_grid(g.get<std::string>());
      } else if (g.is_array()) {
        std::vector<std::uint64_t> grid;
        for (const auto &v : g) {
          if (!v.is_number()) plan_error("n_grid entries must be numbers");
          grid.push_back(to_count(v.get<double>()));
        }
        plan.n_grid = normalise_grid(std::move(grid));
      } else {
        plan_error("n_grid must be a string or an array");
      }
    }
    if (doc.contains("rule")) plan.rule = parse_order_rule(doc.at("rule").get<std::string>());
    if (doc.contains("N")) {
      plan.fixed_order = doc.at("N").get<std::size_t>();
      if (plan.fixed_order == 0) plan_error("N must be >= 1");
    }
    if (doc.contains("replications")) plan.replications = doc.at("replications").get<std::size_t>();
    if (plan.replications == 0) plan_error("replications must be >= 1");
    if (doc.contains("seed")) plan.seed = doc.at("seed").get<std::uint64_t>();
    if (doc.contains("tables")) {
      plan.tables.clear();
      for (const auto &t : doc.at("tables")) {
        const auto s = t.get<std::string>();
        bool found = false;
        for (auto kind : {TableKind::risk, TableKind::rate, TableKind::tail, TableKind::coverage,
                          TableKind::duel})
          if (s == table_name(kind)) {
            plan.tables.push_back(kind);
            found = true;
          }
        if (!found) plan_error("unknown table '" + s + "'");
      }
      if (plan.tables.empty()) plan_error("tables must not be empty");
    }
    if (doc.contains("t_multiples"))
      plan.t_multiples = doc.at("t_multiples").get<std::vector<double>>();
    for (double m : plan.t_multiples)
      if (!(m >= 1.0)) plan_error("t_multiples must be >= 1 (bound holds for t >= eMQ)");
    if (doc.contains("tail_mode")) {
      const auto s = doc.at("tail_mode").get<std::string>();
      if (s == "fixed") plan.tail_mode = TailMode::fixed;
      else if (s == "recursive") plan.tail_mode = TailMode::recursive;
      else plan_error("tail_mode must be fixed or recursive");
    }
    if (doc.contains("q_n_max")) plan.q_n_max = doc.at("q_n_max").get<std::uint64_t>();
    if (doc.contains("alphas")) plan.alphas = doc.at("alphas").get<std::vector<double>>();
    if (doc.contains("rho_inflation")) plan.rho_inflation = doc.at("rho_inflation").get<double>();
    if (!(plan.rho_inflation >= 0.0)) plan_error("rho_inflation must be >= 0");
    if (doc.contains("k_max")) plan.k_max = doc.at("k_max").get<std::size_t>();
  } catch (const json::exception &e) {
    plan_error(e.what());
  }
  return plan;
}

ExperimentPlan ExperimentPlan::load(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io, "cannot open plan file '" + path.string() + "'");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error &e) {
    throw Error(Errc::schema, "plan file '" + path.string() + "': " + e.what());
  }
  // a manifest written by run_plan carries the resolved plan under "plan"
  if (doc.is_object() && doc.contains("plan") && doc.contains("tool")) doc = doc.at("plan");
  return from_json(doc, path.parent_path());
}

ordered_json ExperimentPlan::to_json() const {
  ordered_json j;
  j["name"] = name;
  j["model"] = model.to_json();
  j["n_grid"] = n_grid;
  j["rule"] = std::string(order_rule_name(rule));
  j["N"] = fixed_order;
  j["replications"] = replications;
  j["seed"] = seed;
  std::vector<std::string> t;
  for (auto kind : tables) t.emplace_back(table_name(kind));
  j["tables"] = t;
  j["t_multiples"] = t_multiples;
  j["tail_mode"] = tail_mode == TailMode::fixed ? "fixed" : "recursive";
  j["q_n_max"] = q_n_max.value_or(n_max());
  j["alphas"] = resolved_alphas();
  j["rho_inflation"] = rho_inflation;
  if (k_max) j["k_max"] = *k_max;
  return j;
}

std::uint64_t ExperimentPlan::n_max() const { return n_grid.back(); }

std::vector<double> ExperimentPlan::resolved_alphas() const {
  if (!alphas.empty()) return alphas;
  return {std::exp(-1.0), 0.1, 0.05};
}

std::size_t deterministic_order(const ExperimentPlan &plan, std::uint64_t n) {
  switch (plan.rule) {
  case OrderRule::fixed: return plan.fixed_order;
  case OrderRule::batch_optimal: return batch_optimal_order(plan.model, n);
  case OrderRule::threshold: return threshold_order(plan.model, n);
  case OrderRule::recursive_oracle: return recursive_order_trace(plan.model, n).at(n);
  default:
    throw Error(Errc::config, "rule '" + std::string(order_rule_name(plan.rule)) +
                                  "' depends on the data");
  }
}

// ---------------------------------------------------------------------------
// Tables

std::vector<RiskRow> mc_risk(const ExperimentPlan &plan, unsigned threads) {
  require_replications(plan, 100, "mc_risk");
  const std::size_t G = plan.n_grid.size();
  const bool deterministic = is_deterministic(plan.rule);
  std::vector<std::size_t> orders(G, 0);
  std::size_t k_max;
  if (deterministic) {
    orders = grid_orders(plan);
    k_max = resolve_k_max(plan, *std::max_element(orders.begin(), orders.end()));
  } else {
    k_max = data_driven_k_max(plan);
  }
  const std::size_t R = plan.replications;
  std::vector<double> err(R * G), used(R * G), bound(R * G);
  simulate(plan, k_max, plan.rule == OrderRule::recursive_plugin, threads,
           [&](std::size_t r, std::size_t gi, const CoefficientAccumulator &acc, std::size_t Y) {
             const std::uint64_t n = plan.n_grid[gi];
             const std::size_t N = order_for(plan.rule, plan, n, acc, Y, orders[gi]);
             const auto est = ProjectionEstimate::build(acc.snapshot(), N);
             err[r * G + gi] = l2_error_sq(est, plan.model);
             used[r * G + gi] = static_cast<double>(N);
             bound[r * G + gi] = risk_bound(plan.model, N, n);
           });
  std::vector<RiskRow> rows;
  for (std::size_t gi = 0; gi < G; ++gi) {
    std::vector<double> e(R), u(R), b(R);
    for (std::size_t r = 0; r < R; ++r) {
      e[r] = err[r * G + gi];
      u[r] = used[r * G + gi];
      b[r] = bound[r * G + gi];
    }
    const auto m = moments(e);
    rows.push_back({plan.n_grid[gi], moments(u).mean, m.mean, m.stderr_, moments(b).mean});
  }
  return rows;
}

RateStudy rate_study(const DensityModel &model, const std::vector<std::uint64_t> &n_grid) {
  if (n_grid.size() < 2) throw Error(Errc::domain, "rate study needs at least two grid points");
  const auto [lo, hi] = std::minmax_element(n_grid.begin(), n_grid.end());
  if (*lo < 2) throw Error(Errc::domain, "rate study needs n >= 2");
  if (static_cast<double>(*hi) < 1e3 * static_cast<double>(*lo) * (1.0 - 1e-12))
    throw Error(Errc::domain, "rate study grid must span at least three decades");
  RateStudy s{};
  std::vector<double> lx, ly;
  for (auto n : n_grid) {
    const std::size_t N0 = batch_optimal_order(model, n);
    const double A = risk_bound(model, N0, n);
    const double ratio = A * static_cast<double>(n) / std::log(static_cast<double>(n));
    s.points.push_back({n, N0, A, ratio});
    lx.push_back(std::log(static_cast<double>(n)));
    ly.push_back(std::log(A));
  }
  const double m = static_cast<double>(lx.size());
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / m;
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / m;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxy += (lx[i] - mx) * (ly[i] - my);
    sxx += (lx[i] - mx) * (lx[i] - mx);
  }
  s.slope = sxy / sxx;
  s.intercept = my - s.slope * mx;
  s.max_abs_residual = 0.0;
  s.ratio_min = std::numeric_limits<double>::infinity();
  s.ratio_max = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    s.max_abs_residual =
        std::max(s.max_abs_residual, std::fabs(ly[i] - (s.intercept + s.slope * lx[i])));
    s.ratio_min = std::min(s.ratio_min, s.points[i].ratio_ln);
    s.ratio_max = std::max(s.ratio_max, s.points[i].ratio_ln);
  }
  return s;
}

std::vector<TailRow> mc_tail(const ExperimentPlan &plan, unsigned threads) {
  require_replications(plan, 10'000, "mc_tail");
  const std::size_t G = plan.n_grid.size();
  const double M = plan.model.basis().sup_bound();
  std::vector<std::size_t> orders;
  double Q = 1.0;
  if (plan.tail_mode == TailMode::fixed) {
    if (!is_deterministic(plan.rule))
      throw Error(Errc::config, "fixed-order tail experiments need a deterministic rule");
    orders = grid_orders(plan);
  } else {
    const auto trace = oracle_trace_for(plan);
    for (auto n : plan.n_grid) orders.push_back(trace.at(n));
    Q = q_factor(plan.model, trace, 1, plan.q_n_max.value_or(plan.n_max())).value;
  }
  const std::size_t k_max = resolve_k_max(plan, *std::max_element(orders.begin(), orders.end()));
  const std::size_t R = plan.replications;
  std::vector<double> delta(R * G);
  simulate(plan, k_max, false, threads,
           [&](std::size_t r, std::size_t gi, const CoefficientAccumulator &acc, std::size_t) {
             const auto est = ProjectionEstimate::build(acc.snapshot(), orders[gi]);
             delta[r * G + gi] = deviation_statistic(est, plan.model);
           });
  std::vector<TailRow> rows;
  for (std::size_t gi = 0; gi < G; ++gi) {
    for (double mult : plan.t_multiples) {
      const double t = mult * std::numbers::e * M * Q;
      std::size_t hits = 0;
      for (std::size_t r = 0; r < R; ++r) hits += delta[r * G + gi] > t;
      const double p = static_cast<double>(hits) / static_cast<double>(R);
      rows.push_back({plan.n_grid[gi], orders[gi], Q, mult, t, p, binomial_stderr(p, R),
                      recursive_tail_bound(t, M, Q)});
    }
  }
  return rows;
}

std::vector<CoverageRow> mc_coverage(const ExperimentPlan &plan, unsigned threads) {
  require_replications(plan, 10'000, "mc_coverage");
  if (!is_deterministic(plan.rule))
    throw Error(Errc::config, "coverage experiments need a deterministic rule");
  const std::size_t G = plan.n_grid.size();
  const double M = plan.model.basis().sup_bound();
  const auto orders = grid_orders(plan);
  const std::size_t k_max = resolve_k_max(plan, *std::max_element(orders.begin(), orders.end()));
  const std::size_t R = plan.replications;
  std::vector<double> err(R * G);
  simulate(plan, k_max, false, threads,
           [&](std::size_t r, std::size_t gi, const CoefficientAccumulator &acc, std::size_t) {
             const auto est = ProjectionEstimate::build(acc.snapshot(), orders[gi]);
             err[r * G + gi] = l2_error_sq(est, plan.model);
           });
  std::vector<CoverageRow> rows;
  for (std::size_t gi = 0; gi < G; ++gi) {
    const std::uint64_t n = plan.n_grid[gi];
    const double rho = plan.rho_inflation * plan.model.tail_energy(orders[gi]);
    for (double alpha : plan.resolved_alphas()) {
      const auto rep = confidence_radius(orders[gi], n, M, rho, alpha);
      std::size_t covered = 0;
      for (std::size_t r = 0; r < R; ++r) covered += err[r * G + gi] <= rep.radius_sq;
      const double p = static_cast<double>(covered) / static_cast<double>(R);
      rows.push_back({n, orders[gi], alpha, rep.t, rep.radius_sq, p, binomial_stderr(p, R)});
    }
  }
  return rows;
}

std::vector<DuelRow> selector_duel(const ExperimentPlan &plan, unsigned threads) {
  const std::size_t G = plan.n_grid.size();
  if (plan.n_grid.front() < 4) throw Error(Errc::domain, "selector duel needs n >= 4");
  constexpr OrderRule kRules[] = {OrderRule::batch_optimal, OrderRule::threshold,
                                  OrderRule::recursive_oracle, OrderRule::recursive_plugin,
                                  OrderRule::adaptive};
  constexpr std::size_t kR = std::size(kRules);
  const auto trace = oracle_trace_for(plan);
  std::vector<std::array<std::size_t, 3>> fixed(G);  // N0, L, Y_oracle
  std::size_t needed = 1;
  for (std::size_t gi = 0; gi < G; ++gi) {
    const auto n = plan.n_grid[gi];
    fixed[gi] = {batch_optimal_order(plan.model, n), threshold_order(plan.model, n), trace.at(n)};
    needed = std::max({needed, fixed[gi][0], fixed[gi][1], fixed[gi][2]});
  }
  const std::size_t k_max = std::max(data_driven_k_max(plan), needed);
  const RiskProfile profile(plan.model, std::max<std::size_t>(kDefaultOrderCap, needed));

  const std::size_t R = plan.replications;
  std::vector<double> N(R * G * kR), err(R * G * kR), bound(R * G * kR), tau(R * G);
  simulate(plan, k_max, true, threads,
           [&](std::size_t r, std::size_t gi, const CoefficientAccumulator &acc, std::size_t Y) {
             const auto n = plan.n_grid[gi];
             const auto snap = acc.snapshot();
             for (std::size_t ri = 0; ri < kR; ++ri) {
               std::size_t order = 0;
               switch (kRules[ri]) {
               case OrderRule::recursive_plugin: order = Y; break;
               case OrderRule::adaptive: order = adaptive_order(snap).order; break;
               default: order = fixed[gi][ri]; break;
               }
               const auto est = ProjectionEstimate::build(snap, order);
               const std::size_t slot = (r * G + gi) * kR + ri;
               N[slot] = static_cast<double>(order);
               err[slot] = l2_error_sq(est, plan.model);
               bound[slot] = risk_bound(plan.model, order, n);
             }
             const std::size_t N0 = fixed[gi][0];
             tau[r * G + gi] = 2 * N0 <= snap.k_max()
                                   ? adaptive_statistic(snap, N0) / risk_bound(plan.model, N0, n)
                                   : std::numeric_limits<double>::quiet_NaN();
           });

  std::vector<DuelRow> rows;
  for (std::size_t gi = 0; gi < G; ++gi) {
    const auto n = plan.n_grid[gi];
    const double q_running = q_factor(profile, trace, 1, n).value;
    std::vector<double> t(R);
    for (std::size_t r = 0; r < R; ++r) t[r] = tau[r * G + gi];
    const double tau_med = median(t);
    for (std::size_t ri = 0; ri < kR; ++ri) {
      std::vector<double> nn(R), e(R), b(R);
      for (std::size_t r = 0; r < R; ++r) {
        const std::size_t slot = (r * G + gi) * kR + ri;
        nn[r] = N[slot];
        e[r] = err[slot];
        b[r] = bound[slot];
      }
      const auto m = moments(e);
      rows.push_back({n, kRules[ri], moments(nn).mean, m.mean, m.stderr_, moments(b).mean,
                      profile.optimal_risk(n), q_running, tau_med});
    }
  }
  return rows;
}

std::vector<SelectRow> select_table(const DensityModel &model,
                                    const std::vector<std::uint64_t> &n_grid,
                                    std::uint64_t seed, std::size_t k_max) {
  const auto grid = normalise_grid(n_grid);
  if (grid.front() < 4) throw Error(Errc::domain, "select needs every n >= 4");
  const std::uint64_t n_max = grid.back();
  if (k_max == 0) k_max = CoefficientAccumulator::default_k_max(n_max);
  const auto trace = recursive_order_trace(model, n_max);
  std::size_t cap = kDefaultOrderCap;
  for (auto y : trace.values) cap = std::max<std::size_t>(cap, y);
  const RiskProfile profile(model, cap);

  SampleStream stream(model, seed);
  CoefficientAccumulator acc(model.basis(), k_max);
  PluginOrderTracker tracker(model.basis().sup_bound());
  std::vector<SelectRow> rows;
  double q_running = 0.0;
  std::uint64_t q_done = 0;
  std::size_t gi = 0;
  for (std::uint64_t n = 1; n <= n_max; ++n) {
    acc.push(stream.next());
    if (n == grid[gi]) {
      SelectRow row{};
      row.n = n;
      row.N0 = batch_optimal_order(model, n);
      try {
        row.L = threshold_order(model, n);
      } catch (const Error &e) {
        if (e.code() != Errc::search_exhausted) throw;
      }
      row.Y_oracle = trace.at(n);
      row.Y_plugin = tracker.current();
      row.tau_argmin = adaptive_order(acc.snapshot()).order;
      row.A_star = risk_bound(model, row.N0, n);
      q_running = std::max(q_running, q_factor(profile, trace, q_done + 1, n).value);
      q_done = n;
      row.Q_running = q_running;
      rows.push_back(row);
      ++gi;
    }
    if (n < n_max) tracker.advance(acc);
  }
  return rows;
}

// ---------------------------------------------------------------------------
// CSV output

void write_select_csv(std::ostream &out, const std::vector<SelectRow> &rows) {
  out << "n,N0,L,Y_oracle,Y_plugin,tau_argmin,A_star,Q_running\n";
  for (const auto &r : rows) {
    out << r.n << ',' << r.N0 << ',';
    if (r.L) out << *r.L;
    else out << "NA";
    out << ',' << r.Y_oracle << ',' << r.Y_plugin << ',' << r.tau_argmin << ','
        << format_double(r.A_star) << ',' << format_double(r.Q_running) << '\n';
  }
}

void write_risk_csv(std::ostream &out, const std::vector<RiskRow> &rows, OrderRule rule) {
  out << "n,rule,N,mean_l2_error_sq,stderr,risk_bound\n";
  for (const auto &r : rows)
    out << r.n << ',' << order_rule_name(rule) << ',' << format_double(r.N) << ','
        << format_double(r.mean_l2) << ',' << format_double(r.stderr_l2) << ','
        << format_double(r.risk_bound) << '\n';
}

void write_rate_csv(std::ostream &out, const RateStudy &s) {
  out << "n,N0,A_star,A_star_n_over_ln_n\n";
  for (const auto &p : s.points)
    out << p.n << ',' << p.N0 << ',' << format_double(p.A_star) << ','
        << format_double(p.ratio_ln) << '\n';
}

void write_rate_fit_csv(std::ostream &out, const RateStudy &s) {
  out << "slope,intercept,max_abs_residual,ratio_min,ratio_max\n"
      << format_double(s.slope) << ',' << format_double(s.intercept) << ','
      << format_double(s.max_abs_residual) << ',' << format_double(s.ratio_min) << ','
      << format_double(s.ratio_max) << '\n';
}

void write_tail_csv(std::ostream &out, const std::vector<TailRow> &rows) {
  out << "n,N,Q,t_multiple,t,exceedance,stderr,bound\n";
  for (const auto &r : rows)
    out << r.n << ',' << r.N << ',' << format_double(r.Q) << ',' << format_double(r.t_multiple)
        << ',' << format_double(r.t) << ',' << format_double(r.exceedance) << ','
        << format_double(r.stderr_p) << ',' << format_double(r.bound) << '\n';
}

void write_coverage_csv(std::ostream &out, const std::vector<CoverageRow> &rows) {
  out << "n,N,alpha,t,radius_sq,coverage,stderr\n";
  for (const auto &r : rows)
    out << r.n << ',' << r.N << ',' << format_double(r.alpha) << ',' << format_double(r.t) << ','
        << format_double(r.radius_sq) << ',' << format_double(r.coverage) << ','
        << format_double(r.stderr_p) << '\n';
}

void write_duel_csv(std::ostream &out, const std::vector<DuelRow> &rows) {
  out << "n,rule,N_mean,mean_l2_error_sq,stderr,mean_risk_bound,A_star,Q_running,"
         "tau_ratio_median\n";
  for (const auto &r : rows)
    out << r.n << ',' << order_rule_name(r.rule) << ',' << format_double(r.N_mean) << ','
        << format_double(r.mean_l2) << ',' << format_double(r.stderr_l2) << ','
        << format_double(r.mean_risk_bound) << ',' << format_double(r.A_star) << ','
        << format_double(r.Q_running) << ',' << format_double(r.tau_ratio_median) << '\n';
}

RunResult run_plan(const ExperimentPlan &plan, const std::filesystem::path &out_dir,
                   unsigned threads) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw Error(Errc::io, "cannot create output directory '" + out_dir.string() + "'");

  RunResult result;
  auto emit = [&](const std::string &file, const auto &writer) {
    const auto path = out_dir / file;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(Errc::io, "cannot write '" + path.string() + "'");
    writer(out);
    if (!out) throw Error(Errc::io, "write failed for '" + path.string() + "'");
    result.outputs.push_back(path);
  };

  for (auto kind : plan.tables) {
    switch (kind) {
    case TableKind::risk: {
      const auto rows = mc_risk(plan, threads);
      emit("risk.csv", [&](std::ostream &o) { write_risk_csv(o, rows, plan.rule); });
      break;
    }
    case TableKind::rate: {
      const auto study = rate_study(plan.model, plan.n_grid);
      emit("rate.csv", [&](std::ostream &o) { write_rate_csv(o, study); });
      emit("rate_fit.csv", [&](std::ostream &o) { write_rate_fit_csv(o, study); });
      break;
    }
    case TableKind::tail: {
      const auto rows = mc_tail(plan, threads);
      emit("tail.csv", [&](std::ostream &o) { write_tail_csv(o, rows); });
      break;
    }
    case TableKind::coverage: {
      const auto rows = mc_coverage(plan, threads);
      emit("coverage.csv", [&](std::ostream &o) { write_coverage_csv(o, rows); });
      break;
    }
    case TableKind::duel: {
      const auto rows = selector_duel(plan, threads);
      emit("duel.csv", [&](std::ostream &o) { write_duel_csv(o, rows); });
      break;
    }
    }
  }

  ordered_json manifest;
  manifest["tool"] = "projdens";
  manifest["version"] = std::string(kVersion);
  manifest["command"] = "run";
  manifest["plan"] = plan.to_json();
  manifest["seed_derivation"] = "replication r uses splitmix64(seed ^ splitmix64(r))";
  std::vector<std::string> outputs;
  for (const auto &p : result.outputs) outputs.push_back(p.filename().string());
  manifest["outputs"] = outputs;
  emit("manifest.json", [&](std::ostream &o) { o << manifest.dump(2) << '\n'; });
  return result;
}

} // namespace projdens
