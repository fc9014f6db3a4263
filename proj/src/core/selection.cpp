// SPDX-License-Identifier: Apache-2.0
#include "projdens/selection.hpp"

#include "projdens/error.hpp"
#include "projdens/estimator.hpp"

#include <algorithm>
#include <limits>

namespace projdens {

namespace {

void require_n_at_least(std::uint64_t n, std::uint64_t lo, const char *what) {
  if (n < lo)
    throw Error(Errc::domain, std::string(what) + " needs n >= " + std::to_string(lo));
}

std::size_t resolve_cap(std::optional<std::size_t> cap, std::uint64_t n) {
  if (cap && *cap == 0) throw Error(Errc::domain, "order cap must be >= 1");
  return cap ? *cap : default_order_cap(n);
}

} // namespace

std::size_t default_order_cap(std::uint64_t n) noexcept {
  return static_cast<std::size_t>(std::clamp<std::uint64_t>(n, 1, kDefaultOrderCap));
}

std::size_t batch_optimal_order(const DensityModel &model, std::uint64_t n,
                                std::optional<std::size_t> N_max) {
  require_n_at_least(n, 2, "batch_optimal_order");
  const std::size_t cap = resolve_cap(N_max, n);
  std::size_t best = 1;
  double best_value = risk_bound(model, 1, n);
  for (std::size_t N = 2; N <= cap; ++N) {
    const double v = risk_bound(model, N, n);
    if (v < best_value) {
      best_value = v;
      best = N;
    }
  }
  return best;
}

double optimal_risk(const DensityModel &model, std::uint64_t n,
                    std::optional<std::size_t> N_max) {
  return risk_bound(model, batch_optimal_order(model, n, N_max), n);
}

std::size_t threshold_order(const DensityModel &model, std::uint64_t n,
                            std::optional<std::size_t> k_cap) {
  require_n_at_least(n, 2, "threshold_order");
  const std::size_t cap = resolve_cap(k_cap, n);
  const double level = model.basis().sup_bound() / static_cast<double>(n);
  double c_sq = 1.0;  // c_1^2
  for (std::size_t L = 1; L <= cap; ++L) {
    const double next = model.coefficient(L + 1);
    const double next_sq = next * next;
    if (c_sq >= level && next_sq <= level) return L;
    c_sq = next_sq;
  }
  throw Error(Errc::search_exhausted,
              "no threshold order within k_cap = " + std::to_string(cap));
}

std::size_t recursive_order_step(std::size_t Y, std::uint64_t n, double c_sq_at_Y, double M) {
  if (Y == 0 || n == 0) throw Error(Errc::domain, "recursive step needs Y >= 1 and n >= 1");
  return c_sq_at_Y > M / static_cast<double>(n) ? Y + 1 : Y;
}

std::size_t OrderTrace::at(std::uint64_t n) const {
  if (n == 0 || n > values.size())
    throw Error(Errc::bounds, "trace does not cover n = " + std::to_string(n));
  return values[n - 1];
}

OrderTrace recursive_order_trace(const DensityModel &model, std::uint64_t n_max) {
  if (n_max == 0) throw Error(Errc::domain, "trace needs n_max >= 1");
  const double M = model.basis().sup_bound();
  OrderTrace trace{TraceMode::oracle, {}};
  trace.values.resize(n_max);
  std::size_t Y = 1;
  std::size_t cached_index = 0;
  double cached_sq = 0.0;
  for (std::uint64_t n = 1; n <= n_max; ++n) {
    trace.values[n - 1] = static_cast<std::uint32_t>(Y);
    if (Y != cached_index) {
      const double c = model.coefficient(Y);
      cached_sq = c * c;
      cached_index = Y;
    }
    Y = recursive_order_step(Y, n, cached_sq, M);
  }
  return trace;
}

void PluginOrderTracker::advance(const CoefficientAccumulator &acc) {
  if (Y_ > acc.k_max())
    throw Error(Errc::bounds, "plug-in order " + std::to_string(Y_) +
                                  " exceeds accumulator k_max " + std::to_string(acc.k_max()));
  const double c = acc.mean(Y_);
  Y_ = recursive_order_step(Y_, acc.n(), c * c, M_);
}

OrderTrace recursive_order_trace(const BasisSystem &basis, std::span<const double> samples,
                                 std::size_t k_max) {
  if (samples.empty()) throw Error(Errc::domain, "trace needs n_max >= 1");
  CoefficientAccumulator acc(basis, k_max);
  PluginOrderTracker tracker(basis.sup_bound());
  OrderTrace trace{TraceMode::plug_in, {}};
  trace.values.resize(samples.size());
  trace.values[0] = 1;
  for (std::size_t i = 0; i + 1 < samples.size(); ++i) {
    acc.push(samples[i]);
    tracker.advance(acc);
    trace.values[i + 1] = static_cast<std::uint32_t>(tracker.current());
  }
  return trace;
}

RiskProfile::RiskProfile(const DensityModel &model, std::size_t cap)
    : M_(model.basis().sup_bound()), rho_(cap + 1) {
  if (cap == 0) throw Error(Errc::domain, "risk profile needs cap >= 1");
  for (std::size_t N = 0; N <= cap; ++N) rho_[N] = model.tail_energy(N);
  // Andrew's monotone chain, lower hull, collinear points dropped
  for (std::size_t N = 1; N <= cap; ++N) {
    while (hull_.size() >= 2) {
      const std::size_t a = hull_[hull_.size() - 2], b = hull_.back();
      const double cross = static_cast<double>(b - a) * (rho_[N] - rho_[a]) -
                           (rho_[b] - rho_[a]) * static_cast<double>(N - a);
      if (cross <= 0.0)
        hull_.pop_back();
      else
        break;
    }
    hull_.push_back(N);
  }
}

double RiskProfile::bound(std::size_t N, std::uint64_t n) const {
  return M_ * static_cast<double>(N) / static_cast<double>(n) + rho_.at(N);
}

double RiskProfile::optimal_risk(std::uint64_t n) const {
  if (n == 0) throw Error(Errc::domain, "optimal risk needs n >= 1");
  const double s = M_ / static_cast<double>(n);
  // first hull edge whose slope is >= -s; its left vertex is the minimiser
  std::size_t lo = 0, hi = hull_.size() - 1;
  while (lo < hi) {
    const std::size_t mid = (lo + hi) / 2;
    const std::size_t a = hull_[mid], b = hull_[mid + 1];
    const double slope = (rho_[b] - rho_[a]) / static_cast<double>(b - a);
    if (slope >= -s)
      hi = mid;
    else
      lo = mid + 1;
  }
  const std::size_t N = hull_[lo];
  if (N <= n) return bound(N, n);
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k <= std::min<std::uint64_t>(n, cap()); ++k)
    best = std::min(best, bound(k, n));
  return best;
}

RatioMax q_factor(const RiskProfile &profile, const OrderTrace &trace, std::uint64_t n_lo,
                  std::uint64_t n_hi) {
  if (n_lo == 0 || n_lo > n_hi) throw Error(Errc::domain, "empty n range");
  if (n_hi > trace.n_max()) throw Error(Errc::bounds, "trace does not cover the n range");
  RatioMax best{0.0, n_lo};
  for (std::uint64_t n = n_lo; n <= n_hi; ++n) {
    const std::size_t Y = trace.values[n - 1];
    if (Y > profile.cap()) throw Error(Errc::bounds, "trace order beyond risk profile cap");
    const double r = profile.bound(Y, n) / profile.optimal_risk(n);
    if (r > best.value) best = {r, n};
  }
  return best;
}

RatioMax q_factor(const DensityModel &model, const OrderTrace &trace, std::uint64_t n_lo,
                  std::uint64_t n_hi) {
  std::size_t cap = kDefaultOrderCap;
  for (std::uint64_t n = n_lo; n <= std::min(n_hi, trace.n_max()); ++n)
    cap = std::max<std::size_t>(cap, trace.values[n - 1]);
  return q_factor(RiskProfile(model, cap), trace, n_lo, n_hi);
}

RatioMax quasi_optimality_ratio(const DensityModel &model,
                                const std::function<std::size_t(std::uint64_t)> &rule,
                                std::uint64_t n_lo, std::uint64_t n_hi) {
  if (n_lo == 0 || n_lo > n_hi) throw Error(Errc::domain, "empty n range");
  const RiskProfile profile(model);
  RatioMax best{0.0, n_lo};
  for (std::uint64_t n = n_lo; n <= n_hi; ++n) {
    const double r = risk_bound(model, rule(n), n) / profile.optimal_risk(n);
    if (r > best.value) best = {r, n};
  }
  return best;
}

double adaptive_statistic(const CoefficientSnapshot &snap, std::size_t N) {
  if (N == 0) throw Error(Errc::domain, "adaptive statistic needs N >= 1");
  if (2 * N > snap.k_max())
    throw Error(Errc::bounds, "adaptive statistic needs 2N <= k_max");
  double sum = 0.0;
  for (std::size_t k = N + 1; k <= 2 * N; ++k) {
    const double c = snap.at(k);
    sum += c * c;
  }
  return sum;
}

AdaptiveChoice adaptive_order(const CoefficientSnapshot &snap) {
  require_n_at_least(snap.n(), 4, "adaptive_order");
  const std::uint64_t by_n = snap.n() / 2;
  const std::size_t by_k = snap.k_max() / 2;
  const std::size_t hi = static_cast<std::size_t>(std::min<std::uint64_t>(by_n, by_k));
  if (hi < 2) throw Error(Errc::bounds, "adaptive_order needs k_max >= 4");
  std::vector<double> prefix(2 * hi + 1, 0.0);
  const auto c = snap.values();
  // c_1 never enters tau (N >= 2), so the sums start at k = 2
  for (std::size_t k = 2; k <= 2 * hi; ++k) prefix[k] = prefix[k - 1] + c[k - 1] * c[k - 1];
  AdaptiveChoice best{2, hi, by_n > by_k};
  double best_value = prefix[4] - prefix[2];
  for (std::size_t N = 3; N <= hi; ++N) {
    const double v = prefix[2 * N] - prefix[N];
    if (v < best_value) {
      best_value = v;
      best.order = N;
    }
  }
  return best;
}

} // namespace projdens
