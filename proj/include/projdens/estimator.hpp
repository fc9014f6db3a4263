// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "projdens/coefficients.hpp"
#include "projdens/density_model.hpp"

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace projdens {

/// Truncated series f_{N,n}(x) = sum_{k=1}^N c_k(n) phi_k(x).
class ProjectionEstimate {
public:
  ProjectionEstimate(BasisSystem basis, std::vector<double> coeffs, std::uint64_t n);

  /// First N coefficients of the snapshot; Errc::bounds if N > k_max.
  static ProjectionEstimate build(const CoefficientSnapshot &snap, std::size_t N);

  const BasisSystem &basis() const noexcept { return basis_; }
  std::size_t order() const noexcept { return coeffs_.size(); }
  std::uint64_t n() const noexcept { return n_; }
  std::span<const double> coefficients() const noexcept { return coeffs_; }

  /// Raw series value; may be negative.
  double evaluate_at(double x) const;

  /// `x,f_hat` over `points` equally spaced abscissae 0, 1/(points-1), ..., 1.
  /// With clip, negative values are written as 0 (display only).
  void write_grid_csv(std::ostream &out, std::size_t points, bool clip = false) const;

private:
  BasisSystem basis_;
  std::vector<double> coeffs_;
  std::uint64_t n_;
};

/// ||f_{N,n} - f||^2 = sum_{k<=N} (c_k(n) - c_k)^2 + rho(N).
double l2_error_sq(const ProjectionEstimate &est, const DensityModel &model);

/// sum_{k<=N} (c_k(n) - c_k)^2, the stochastic part of the error.
double coefficient_error_sq(const ProjectionEstimate &est, const DensityModel &model);

/// A(N,n) = M N / n + rho(N).
double risk_bound(const DensityModel &model, std::size_t N, std::uint64_t n);

} // namespace projdens
