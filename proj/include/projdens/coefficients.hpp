// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "projdens/basis.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

namespace projdens {

/// Immutable copy of (n, c_1(n), ..., c_{k_max}(n)).
class CoefficientSnapshot {
public:
  CoefficientSnapshot(BasisSystem basis, std::uint64_t n, std::vector<double> coeffs);

  const BasisSystem &basis() const noexcept { return basis_; }
  std::uint64_t n() const noexcept { return n_; }
  std::size_t k_max() const noexcept { return coeffs_.size(); }
  /// c_k(n), 1-based; throws Errc::bounds beyond k_max.
  double at(std::size_t k) const;
  std::span<const double> values() const noexcept { return coeffs_; }

  /// `# n=<count> basis=<kind> seed=<seed>` followed by `k,c_hat` rows.
  void write_csv(std::ostream &out, std::optional<std::uint64_t> seed = std::nullopt) const;

private:
  BasisSystem basis_;
  std::uint64_t n_;
  std::vector<double> coeffs_;
};

/// Running means c_k(n) = n^{-1} sum_i phi_k(xi_i) for k = 1..k_max, updated
/// one sample at a time with c_k(n+1) = c_k(n) + (phi_k(x) - c_k(n))/(n+1).
class CoefficientAccumulator {
public:
  static constexpr std::size_t kDefaultCap = 4096;

  CoefficientAccumulator(BasisSystem basis, std::size_t k_max);

  /// k_max = min(n_planned, 4096).
  static std::size_t default_k_max(std::uint64_t n_planned) noexcept;

  void push(double x);
  void push(std::span<const double> xs);

  std::uint64_t n() const noexcept { return n_; }
  std::size_t k_max() const noexcept { return means_.size(); }
  const BasisSystem &basis() const noexcept { return basis_; }
  /// c_k(n) without copying; 1-based, no bounds check beyond an assert.
  double mean(std::size_t k) const noexcept { return means_[k - 1]; }

  CoefficientSnapshot snapshot() const;

private:
  BasisSystem basis_;
  std::uint64_t n_ = 0;
  std::vector<double> means_;
  std::vector<double> phi_;
};

} // namespace projdens
