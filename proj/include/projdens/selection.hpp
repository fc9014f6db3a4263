// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "projdens/coefficients.hpp"
#include "projdens/density_model.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace projdens {

/// Largest order searched by the model-based selectors unless told otherwise.
inline constexpr std::size_t kDefaultOrderCap = 4096;

/// min(n, 4096)
std::size_t default_order_cap(std::uint64_t n) noexcept;

/// N0(n) = argmin_{1 <= N <= N_max} A(N,n), smallest N on ties.
std::size_t batch_optimal_order(const DensityModel &model, std::uint64_t n,
                                std::optional<std::size_t> N_max = std::nullopt);

/// A*(n) = A(N0(n), n).
double optimal_risk(const DensityModel &model, std::uint64_t n,
                    std::optional<std::size_t> N_max = std::nullopt);

/// Minimal L with c_L^2 >= M/n and c_{L+1}^2 <= M/n. Throws
/// Errc::search_exhausted when no L <= k_cap qualifies.
std::size_t threshold_order(const DensityModel &model, std::uint64_t n,
                            std::optional<std::size_t> k_cap = std::nullopt);

/// One step of the recursive order rule: Y+1 if c_sq_at_Y > M/n, else Y.
std::size_t recursive_order_step(std::size_t Y, std::uint64_t n, double c_sq_at_Y, double M);

enum class TraceMode { oracle, plug_in };

/// Y(1..n_max) with Y(1) = 1.
struct OrderTrace {
  TraceMode mode;
  std::vector<std::uint32_t> values;

  std::uint64_t n_max() const noexcept { return values.size(); }
  /// Y(n), 1-based; Errc::bounds outside 1..n_max.
  std::size_t at(std::uint64_t n) const;
};

/// Drives the recursion with the true c_k^2.
OrderTrace recursive_order_trace(const DensityModel &model, std::uint64_t n_max);

/// Streams the sample through an accumulator of size k_max and drives the
/// recursion with c_{Y(n)}(n)^2 observed after n samples. Errc::bounds if Y
/// outgrows k_max.
OrderTrace recursive_order_trace(const BasisSystem &basis, std::span<const double> samples,
                                 std::size_t k_max);

/// Incremental form of the plug-in rule for callers that already stream the
/// sample through an accumulator. After the accumulator has seen n samples,
/// `advance` moves from Y(n) to Y(n+1).
class PluginOrderTracker {
public:
  explicit PluginOrderTracker(double M) : M_(M) {}
  std::size_t current() const noexcept { return Y_; }
  void advance(const CoefficientAccumulator &acc);

private:
  double M_;
  std::size_t Y_ = 1;
};

/// rho(N) for N = 1..cap and the lower convex hull of (N, rho(N)); gives
/// min_N A(N,n) in O(log cap) for sweeps over many n.
class RiskProfile {
public:
  explicit RiskProfile(const DensityModel &model, std::size_t cap = kDefaultOrderCap);

  double M() const noexcept { return M_; }
  std::size_t cap() const noexcept { return rho_.size() - 1; }
  double rho(std::size_t N) const { return rho_.at(N); }
  double bound(std::size_t N, std::uint64_t n) const;
  /// A*(n) with N restricted to 1..min(n, cap).
  double optimal_risk(std::uint64_t n) const;

private:
  double M_;
  std::vector<double> rho_;          // index N = 0..cap
  std::vector<std::size_t> hull_;    // lower hull vertices, increasing N
};

struct RatioMax {
  double value;
  std::uint64_t argmax_n;
};

/// Q[Y] = max_{n in [n_lo, n_hi]} A(Y(n),n)/A*(n).
RatioMax q_factor(const DensityModel &model, const OrderTrace &trace, std::uint64_t n_lo,
                  std::uint64_t n_hi);
RatioMax q_factor(const RiskProfile &profile, const OrderTrace &trace, std::uint64_t n_lo,
                  std::uint64_t n_hi);

/// Gamma-hat = max_{n in [n_lo, n_hi]} A(K(n),n)/A*(n).
RatioMax quasi_optimality_ratio(const DensityModel &model,
                                const std::function<std::size_t(std::uint64_t)> &rule,
                                std::uint64_t n_lo, std::uint64_t n_hi);

/// tau_n(N) = sum_{k=N+1}^{2N} c_k(n)^2.
double adaptive_statistic(const CoefficientSnapshot &snap, std::size_t N);

struct AdaptiveChoice {
  std::size_t order;
  std::size_t range_hi;  // upper end of the searched range
  bool clipped;          // n/2 exceeded k_max/2 and the range was shortened
};

/// argmin of tau_n(N) over N in [2, n/2] (clipped to k_max/2), smallest N on
/// ties.
AdaptiveChoice adaptive_order(const CoefficientSnapshot &snap);

} // namespace projdens
