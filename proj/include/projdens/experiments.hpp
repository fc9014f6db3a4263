// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "projdens/density_model.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace projdens {

/// Parses "1e2:1e6:log10" (one point per decade), "1e2:1e6:log10/2" (two per
/// decade, rounded to integers) or a comma separated list.
std::vector<std::uint64_t> parse_n_grid(std::string_view text);
std::vector<std::uint64_t> default_n_grid();

enum class OrderRule { fixed, batch_optimal, threshold, recursive_oracle, recursive_plugin, adaptive };
std::string_view order_rule_name(OrderRule rule) noexcept;
OrderRule parse_order_rule(std::string_view name);
/// fixed, batch_optimal, threshold and recursive_oracle do not look at the data.
bool is_deterministic(OrderRule rule) noexcept;

enum class TableKind { risk, rate, tail, coverage, duel };
std::string_view table_name(TableKind kind) noexcept;

enum class TailMode { fixed, recursive };

struct ExperimentPlan {
  std::string name = "experiment";
  DensityModel model = DensityModel::uniform();
  std::vector<std::uint64_t> n_grid = default_n_grid();
  OrderRule rule = OrderRule::fixed;
  std::size_t fixed_order = 1;
  std::size_t replications = 1000;
  std::uint64_t seed = 1;
  std::vector<TableKind> tables{TableKind::risk};
  std::vector<double> t_multiples{1.0, 2.0, 3.0};
  TailMode tail_mode = TailMode::fixed;
  std::optional<std::uint64_t> q_n_max;  // trace length used for Q; default max(n grid)
  std::vector<double> alphas;            // default {1/e, 0.1, 0.05}
  double rho_inflation = 1.0;
  std::optional<std::size_t> k_max;

  /// `base_dir` resolves a relative "model_file".
  static ExperimentPlan from_json(const nlohmann::json &doc,
                                  const std::filesystem::path &base_dir = {});
  static ExperimentPlan load(const std::filesystem::path &path);
  /// Fully resolved plan with the model inlined; from_json(to_json()) is the
  /// same plan.
  nlohmann::ordered_json to_json() const;

  std::uint64_t n_max() const;
  std::vector<double> resolved_alphas() const;
};

/// Order used for sample size n under a deterministic rule.
std::size_t deterministic_order(const ExperimentPlan &plan, std::uint64_t n);

struct RiskRow {
  std::uint64_t n;
  double N;            // order, or its mean over replications for data-driven rules
  double mean_l2;
  double stderr_l2;
  double risk_bound;   // A(N,n), averaged over replications for data-driven rules
};

struct RateStudy {
  struct Point {
    std::uint64_t n;
    std::size_t N0;
    double A_star;
    double ratio_ln;  // A*(n) n / ln n
  };
  std::vector<Point> points;
  double slope;
  double intercept;
  double max_abs_residual;
  double ratio_min;
  double ratio_max;
};

struct TailRow {
  std::uint64_t n;
  std::size_t N;
  double Q;
  double t_multiple;
  double t;
  double exceedance;
  double stderr_p;
  double bound;
};

struct CoverageRow {
  std::uint64_t n;
  std::size_t N;
  double alpha;
  double t;
  double radius_sq;
  double coverage;
  double stderr_p;
};

struct DuelRow {
  std::uint64_t n;
  OrderRule rule;
  double N_mean;
  double mean_l2;
  double stderr_l2;
  double mean_risk_bound;
  double A_star;
  double Q_running;
  double tau_ratio_median;
};

std::vector<RiskRow> mc_risk(const ExperimentPlan &plan, unsigned threads = 0);
RateStudy rate_study(const DensityModel &model, const std::vector<std::uint64_t> &n_grid);
std::vector<TailRow> mc_tail(const ExperimentPlan &plan, unsigned threads = 0);
std::vector<CoverageRow> mc_coverage(const ExperimentPlan &plan, unsigned threads = 0);
std::vector<DuelRow> selector_duel(const ExperimentPlan &plan, unsigned threads = 0);

void write_risk_csv(std::ostream &out, const std::vector<RiskRow> &rows, OrderRule rule);
void write_rate_csv(std::ostream &out, const RateStudy &study);
void write_rate_fit_csv(std::ostream &out, const RateStudy &study);
void write_tail_csv(std::ostream &out, const std::vector<TailRow> &rows);
void write_coverage_csv(std::ostream &out, const std::vector<CoverageRow> &rows);
void write_duel_csv(std::ostream &out, const std::vector<DuelRow> &rows);

/// One row of the `select` table: every order rule evaluated at one n. A single
/// sample stream of size max(grid) is shared by the data-driven columns.
struct SelectRow {
  std::uint64_t n;
  std::size_t N0;
  std::optional<std::size_t> L;  // empty when the threshold search is exhausted
  std::size_t Y_oracle;
  std::size_t Y_plugin;
  std::size_t tau_argmin;
  double A_star;
  double Q_running;  // max of A(Y_oracle(m),m)/A*(m) over m <= n
};

/// k_max = 0 selects min(max(grid), 4096). Grid values must be >= 4.
std::vector<SelectRow> select_table(const DensityModel &model,
                                    const std::vector<std::uint64_t> &n_grid,
                                    std::uint64_t seed, std::size_t k_max = 0);
void write_select_csv(std::ostream &out, const std::vector<SelectRow> &rows);

struct RunResult {
  std::vector<std::filesystem::path> outputs;  // CSVs, then manifest.json
};

/// Runs every table of the plan, writes one CSV per table plus manifest.json
/// into out_dir. threads == 0 means hardware concurrency. Output bytes do not
/// depend on the thread count.
RunResult run_plan(const ExperimentPlan &plan, const std::filesystem::path &out_dir,
                   unsigned threads = 0);

std::string_view library_version() noexcept;

} // namespace projdens
