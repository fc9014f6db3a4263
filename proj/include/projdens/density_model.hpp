// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "projdens/basis.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

namespace projdens {

/// Finitely many coefficients given as (k, c_k) pairs; c_1 may be omitted.
struct ExplicitCoefficients {
  std::vector<std::pair<std::size_t, double>> terms;
};

/// c_k = a * k^{-(1+gamma)/2} for k0 <= k (<= cutoff), zero for 1 < k < k0,
/// so that c_k^2 = a^2 k^{-(1+gamma)}.
struct PowerLawCoefficients {
  double amplitude;
  double gamma;
  std::size_t k0 = 2;
  std::optional<std::size_t> cutoff;
};

/// c_k = a * r^k for k >= 2.
struct GeometricCoefficients {
  double amplitude;
  double ratio;
};

using CoefficientSpec =
    std::variant<ExplicitCoefficients, PowerLawCoefficients, GeometricCoefficients>;

/// Oracle density f = sum_k c_k phi_k with c_1 = 1 and exactly known
/// coefficients. Construction rejects specs for which
/// sqrt2 * sum_{k>=2} |c_k| > 1, which guarantees f >= 0.
class DensityModel {
public:
  DensityModel(BasisSystem basis, CoefficientSpec spec);

  static DensityModel uniform(BasisKind kind = BasisKind::cosine);
  static DensityModel from_json(const nlohmann::json &doc);
  static DensityModel load(const std::string &path);
  nlohmann::json to_json() const;

  const BasisSystem &basis() const noexcept { return basis_; }
  const CoefficientSpec &spec() const noexcept { return spec_; }

  double coefficient(std::size_t k) const;

  /// rho(N) = sum_{k>N} c_k^2.
  double tail_energy(std::size_t N) const;

  /// f(x); throws Errc::domain outside [0,1] and Errc::model for models
  /// without a finite pointwise representation (untruncated power laws).
  double density_at(double x) const;

  /// Leading coefficients c_1..c_K used for pointwise evaluation. Empty when
  /// the model has no pointwise representation.
  const std::vector<double> &series() const noexcept { return series_; }
  bool has_pointwise() const noexcept { return !series_.empty(); }

  /// sum_{k>=2} |c_k|
  double abs_coefficient_sum() const noexcept { return abs_sum_; }

  /// 1 + sqrt2 * sum_{k>=2} |c_k| >= sup f.
  double envelope_bound() const noexcept;

  /// Largest k with c_k != 0, if finite.
  std::optional<std::size_t> last_nonzero() const noexcept { return last_nonzero_; }

  /// True when c_k^2 is non-increasing for all k >= 2.
  bool monotone_tail() const noexcept;

private:
  double power_law_tail(std::size_t N) const;

  BasisSystem basis_;
  CoefficientSpec spec_;
  std::vector<double> series_;
  std::vector<double> rho_table_;  // rho(N), N = 0..size-1
  std::optional<std::size_t> last_nonzero_;
  double abs_sum_ = 0.0;
};

} // namespace projdens
