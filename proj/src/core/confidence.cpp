// SPDX-License-Identifier: Apache-2.0
#include "projdens/confidence.hpp"

#include "projdens/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace projdens {

double deviation_statistic(const ProjectionEstimate &est, const DensityModel &model, double M) {
  if (!(M > 0.0)) throw Error(Errc::domain, "M must be positive");
  const double scale =
      static_cast<double>(est.n()) / (M * static_cast<double>(est.order()));
  return scale * coefficient_error_sq(est, model);
}

double deviation_statistic(const ProjectionEstimate &est, const DensityModel &model) {
  return deviation_statistic(est, model, model.basis().sup_bound());
}

bool deviation_in_stated_range(std::size_t N, std::uint64_t n) noexcept {
  return n >= 5 && N >= 2 && N + 2 <= n;
}

double tail_bound(double t, double M) {
  return recursive_tail_bound(t, M, 1.0);
}

double recursive_tail_bound(double t, double M, double Q) {
  if (!(M > 0.0)) throw Error(Errc::domain, "M must be positive");
  if (!(Q >= 1.0) || !std::isfinite(Q)) throw Error(Errc::domain, "Q must be finite and >= 1");
  const double scale = std::numbers::e * M * Q;
  if (!(t >= scale))
    throw Error(Errc::domain, "tail bound only holds for t >= e*M*Q");
  return std::exp(-t / scale);
}

std::string_view rho_source_name(RhoSource s) noexcept {
  return s == RhoSource::oracle ? "oracle" : "adaptive";
}

nlohmann::ordered_json ConfidenceReport::to_json() const {
  return {{"N", N},         {"n", n},     {"M", M},
          {"rho", rho},     {"alpha", alpha}, {"t", t},
          {"radius_sq", radius_sq}, {"rho_source", std::string(rho_source_name(rho_source))},
          {"heuristic", heuristic()}};
}

ConfidenceReport confidence_radius(std::size_t N, std::uint64_t n, double M, double rho,
                                   double alpha, RhoSource source) {
  if (!(alpha > 0.0 && alpha <= std::exp(-1.0)))
    throw Error(Errc::domain, "alpha must lie in (0, 1/e]");
  if (N == 0 || n == 0) throw Error(Errc::domain, "confidence radius needs N, n >= 1");
  if (!(M > 0.0)) throw Error(Errc::domain, "M must be positive");
  if (!(rho >= 0.0)) throw Error(Errc::domain, "rho must be non-negative");
  const double t = std::numbers::e * M * std::max(1.0, std::log(1.0 / alpha));
  const double radius_sq =
      rho + M * static_cast<double>(N) / static_cast<double>(n) * t;
  return {N, n, M, rho, alpha, t, radius_sq, source};
}

} // namespace projdens
