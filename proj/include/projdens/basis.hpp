// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace projdens {

enum class BasisKind { cosine, trigonometric };

std::string_view basis_kind_name(BasisKind kind) noexcept;
BasisKind parse_basis_kind(std::string_view name);

/// Uniformly bounded orthonormal system {phi_k}, k >= 1, on [0,1] with
/// Lebesgue measure.
///
/// cosine:        phi_1 = 1, phi_k(x) = sqrt2 cos((k-1) pi x)
/// trigonometric: phi_1 = 1, phi_{2m}(x) = sqrt2 cos(2 pi m x),
///                phi_{2m+1}(x) = sqrt2 sin(2 pi m x)
///
/// A system may be restricted to its first `dimension` elements; the
/// constant-only system {phi_1} has dimension 1.
class BasisSystem {
public:
  explicit BasisSystem(BasisKind kind = BasisKind::cosine,
                       std::optional<std::size_t> dimension = std::nullopt);

  BasisKind kind() const noexcept { return kind_; }
  std::optional<std::size_t> dimension() const noexcept { return dimension_; }

  /// phi_k(x). Throws Errc::domain for k == 0 or x outside [0,1], and
  /// Errc::bounds for k beyond the dimension.
  double evaluate(std::size_t k, double x) const;

  /// Writes phi_1(x), ..., phi_K(x) into out (K = out.size()). The angle
  /// recurrence is re-anchored with std::cos/std::sin every 64 indices, so the
  /// absolute error stays at a few ulps for K in the thousands. No domain check.
  void fill(double x, std::span<double> out) const noexcept;

  /// sum_{k=1}^{K} coeffs[k-1] phi_k(x) without materialising the basis values.
  double series(double x, std::span<const double> coeffs) const noexcept;

  /// M = sup_k sup_x phi_k(x)^2.
  double sup_bound() const noexcept;

  bool operator==(const BasisSystem &) const = default;

private:
  BasisKind kind_;
  std::optional<std::size_t> dimension_;
};

} // namespace projdens
