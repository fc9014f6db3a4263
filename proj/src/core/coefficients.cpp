// SPDX-License-Identifier: Apache-2.0
#include "projdens/coefficients.hpp"

#include "projdens/error.hpp"
#include "format.hpp"

#include <algorithm>
#include <cassert>
#include <ostream>

namespace projdens {

CoefficientSnapshot::CoefficientSnapshot(BasisSystem basis, std::uint64_t n,
                                         std::vector<double> coeffs)
    : basis_(basis), n_(n), coeffs_(std::move(coeffs)) {
  if (n_ == 0) throw Error(Errc::state, "snapshot of an empty sample");
  if (coeffs_.empty()) throw Error(Errc::config, "snapshot needs at least one coefficient");
}

double CoefficientSnapshot::at(std::size_t k) const {
  if (k == 0 || k > coeffs_.size())
    throw Error(Errc::bounds, "coefficient index " + std::to_string(k) +
                                  " outside tracked range 1.." +
                                  std::to_string(coeffs_.size()));
  return coeffs_[k - 1];
}

void CoefficientSnapshot::write_csv(std::ostream &out,
                                    std::optional<std::uint64_t> seed) const {
  out << "# n=" << n_ << " basis=" << basis_kind_name(basis_.kind());
  if (seed) out << " seed=" << *seed;
  out << "\nk,c_hat\n";
  for (std::size_t k = 1; k <= coeffs_.size(); ++k)
    out << k << ',' << detail::format_double(coeffs_[k - 1]) << '\n';
}

CoefficientAccumulator::CoefficientAccumulator(BasisSystem basis, std::size_t k_max)
    : basis_(basis), means_(k_max, 0.0), phi_(k_max, 0.0) {
  if (k_max == 0) throw Error(Errc::config, "accumulator needs k_max >= 1");
  if (basis.dimension() && k_max > *basis.dimension())
    throw Error(Errc::bounds, "k_max exceeds basis dimension");
}

std::size_t CoefficientAccumulator::default_k_max(std::uint64_t n_planned) noexcept {
  return static_cast<std::size_t>(
      std::max<std::uint64_t>(1, std::min<std::uint64_t>(n_planned, kDefaultCap)));
}

void CoefficientAccumulator::push(double x) {
  if (!(x >= 0.0 && x <= 1.0)) throw Error(Errc::domain, "sample outside [0,1]");
  basis_.fill(x, phi_);
  ++n_;
  const double inv = 1.0 / static_cast<double>(n_);
  for (std::size_t i = 0; i < means_.size(); ++i) means_[i] += (phi_[i] - means_[i]) * inv;
}

void CoefficientAccumulator::push(std::span<const double> xs) {
  for (double x : xs) push(x);
}

CoefficientSnapshot CoefficientAccumulator::snapshot() const {
  if (n_ == 0) throw Error(Errc::state, "snapshot of an empty accumulator");
  return CoefficientSnapshot(basis_, n_, means_);
}

} // namespace projdens
