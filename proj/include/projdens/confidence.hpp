// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "projdens/density_model.hpp"
#include "projdens/estimator.hpp"

#include <cstdint>
#include <string_view>

#include <json.hpp>

namespace projdens {

/// Delta = (n/(M N)) (||f_{N,n} - f||^2 - rho(N)), evaluated as
/// (n/(M N)) sum_{k<=N} (c_k(n) - c_k)^2.
double deviation_statistic(const ProjectionEstimate &est, const DensityModel &model);

/// Same statistic with an explicit M (used for the scaling check and for
/// experiments that hold M fixed).
double deviation_statistic(const ProjectionEstimate &est, const DensityModel &model, double M);

/// True when 2 <= N <= n-2 and n >= 5, the range the tail bound is stated for.
bool deviation_in_stated_range(std::size_t N, std::uint64_t n) noexcept;

/// exp(-t/(e M)); Errc::domain for t < e M.
double tail_bound(double t, double M);

/// exp(-t/(e M Q)); Errc::domain for Q < 1 or t < e M Q.
double recursive_tail_bound(double t, double M, double Q);

enum class RhoSource { oracle, adaptive };
std::string_view rho_source_name(RhoSource s) noexcept;

struct ConfidenceReport {
  std::size_t N;
  std::uint64_t n;
  double M;
  double rho;
  double alpha;
  double t;
  double radius_sq;
  RhoSource rho_source = RhoSource::oracle;

  /// rho came from the adaptive surrogate; nothing is proved for that case.
  bool heuristic() const noexcept { return rho_source == RhoSource::adaptive; }
  nlohmann::ordered_json to_json() const;
};

/// t(alpha) = e M max(1, ln(1/alpha)), radius^2 = rho + (M N / n) t(alpha).
/// Errc::domain unless 0 < alpha <= 1/e, rho >= 0, N >= 1, n >= 1.
ConfidenceReport confidence_radius(std::size_t N, std::uint64_t n, double M, double rho,
                                   double alpha, RhoSource source = RhoSource::oracle);

} // namespace projdens
