// SPDX-License-Identifier: Apache-2.0
#include "projdens/basis.hpp"

#include "projdens/error.hpp"
#include "trig.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace projdens {

namespace {

constexpr std::size_t kLanes = 16;
constexpr std::size_t kAnchorStride = 512; // multiple of kLanes

// Visits (j, cos(j*w), sin(j*w)) for j = 1..count, where w = pi*scale*x.
// Eight independent rotation chains advance by 8w per block so the loop
// is not latency bound; every kAnchorStride indices the chains restart
// from exactly evaluated values.
template <class Visit>
void for_each_harmonic(double x, double scale, std::size_t count, Visit &&visit) {
  if (count == 0) return;
  const double t1 = scale * x;
  const double c1 = detail::cos_pi(t1);
  const double s1 = detail::sin_pi(t1);
  double wc[kLanes], ws[kLanes];
  wc[0] = c1;
  ws[0] = s1;
  for (std::size_t l = 1; l < kLanes; ++l) {
    wc[l] = wc[l - 1] * c1 - ws[l - 1] * s1;
    ws[l] = ws[l - 1] * c1 + wc[l - 1] * s1;
  }
  const double rc = wc[kLanes - 1];
  const double rs = ws[kLanes - 1];
  double c[kLanes] = {}, s[kLanes] = {};
  for (std::size_t base = 0; base < count; base += kLanes) {
    if (base % kAnchorStride == 0) {
      const double t = static_cast<double>(base) * t1;
      const double ac = base == 0 ? 1.0 : detail::cos_pi(t);
      const double as = base == 0 ? 0.0 : detail::sin_pi(t);
      for (std::size_t l = 0; l < kLanes; ++l) {
        c[l] = ac * wc[l] - as * ws[l];
        s[l] = as * wc[l] + ac * ws[l];
      }
    } else {
      for (std::size_t l = 0; l < kLanes; ++l) {
        const double cn = c[l] * rc - s[l] * rs;
        s[l] = s[l] * rc + c[l] * rs;
        c[l] = cn;
      }
    }
    const std::size_t n = std::min(kLanes, count - base);
    for (std::size_t l = 0; l < n; ++l) visit(base + l + 1, c[l], s[l]);
  }
}

} // namespace

std::string_view basis_kind_name(BasisKind kind) noexcept {
  return kind == BasisKind::cosine ? "cosine" : "trig";
}

BasisKind parse_basis_kind(std::string_view name) {
  if (name == "cosine" || name == "cos") return BasisKind::cosine;
  if (name == "trig" || name == "trigonometric") return BasisKind::trigonometric;
  throw Error(Errc::config, "unknown basis '" + std::string(name) +
                                "' (expected cosine or trig)");
}

BasisSystem::BasisSystem(BasisKind kind, std::optional<std::size_t> dimension)
    : kind_(kind), dimension_(dimension) {
  if (dimension_ && *dimension_ == 0)
    throw Error(Errc::config, "basis dimension must be positive");
}

double BasisSystem::evaluate(std::size_t k, double x) const {
  if (k == 0) throw Error(Errc::domain, "basis index must be >= 1");
  if (!(x >= 0.0 && x <= 1.0))
    throw Error(Errc::domain, "basis argument outside [0,1]");
  if (dimension_ && k > *dimension_)
    throw Error(Errc::bounds, "basis index beyond system dimension");
  if (k == 1) return 1.0;
  if (kind_ == BasisKind::cosine)
    return std::numbers::sqrt2 * detail::cos_pi(static_cast<double>(k - 1) * x);
  const double m = static_cast<double>(k / 2);
  return k % 2 == 0 ? std::numbers::sqrt2 * detail::cos_pi(2.0 * m * x)
                    : std::numbers::sqrt2 * detail::sin_pi(2.0 * m * x);
}

void BasisSystem::fill(double x, std::span<double> out) const noexcept {
  if (out.empty()) return;
  out[0] = 1.0;
  const std::size_t K = out.size();
  constexpr double r2 = std::numbers::sqrt2;
  if (kind_ == BasisKind::cosine) {
    for_each_harmonic(x, 1.0, K - 1, [&](std::size_t j, double c, double) {
      out[j] = r2 * c;
    });
  } else {
    for_each_harmonic(x, 2.0, K / 2, [&](std::size_t m, double c, double s) {
      out[2 * m - 1] = r2 * c;
      if (2 * m < K) out[2 * m] = r2 * s;
    });
  }
}

double BasisSystem::series(double x, std::span<const double> coeffs) const noexcept {
  if (coeffs.empty()) return 0.0;
  const std::size_t K = coeffs.size();
  double acc = 0.0;
  if (kind_ == BasisKind::cosine) {
    for_each_harmonic(x, 1.0, K - 1, [&](std::size_t j, double c, double) {
      acc += coeffs[j] * c;
    });
  } else {
    for_each_harmonic(x, 2.0, K / 2, [&](std::size_t m, double c, double s) {
      acc += coeffs[2 * m - 1] * c;
      if (2 * m < K) acc += coeffs[2 * m] * s;
    });
  }
  return coeffs[0] + std::numbers::sqrt2 * acc;
}

double BasisSystem::sup_bound() const noexcept {
  return dimension_ && *dimension_ == 1 ? 1.0 : 2.0;
}

} // namespace projdens
