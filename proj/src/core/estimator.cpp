// SPDX-License-Identifier: Apache-2.0
#include "projdens/estimator.hpp"

#include "projdens/error.hpp"
#include "format.hpp"

#include <algorithm>
#include <ostream>

namespace projdens {

namespace {

void require_same_basis(const ProjectionEstimate &est, const DensityModel &model) {
  if (est.basis().kind() != model.basis().kind())
    throw Error(Errc::config, "estimate and model use different bases");
}

} // namespace

ProjectionEstimate::ProjectionEstimate(BasisSystem basis, std::vector<double> coeffs,
                                       std::uint64_t n)
    : basis_(basis), coeffs_(std::move(coeffs)), n_(n) {
  if (coeffs_.empty()) throw Error(Errc::domain, "projection order must be >= 1");
  if (n_ == 0) throw Error(Errc::state, "projection estimate needs n >= 1");
}

ProjectionEstimate ProjectionEstimate::build(const CoefficientSnapshot &snap, std::size_t N) {
  if (N == 0) throw Error(Errc::domain, "projection order must be >= 1");
  if (N > snap.k_max())
    throw Error(Errc::bounds, "order " + std::to_string(N) + " exceeds tracked k_max " +
                                  std::to_string(snap.k_max()));
  const auto v = snap.values();
  return ProjectionEstimate(snap.basis(), std::vector<double>(v.begin(), v.begin() + N),
                            snap.n());
}

double ProjectionEstimate::evaluate_at(double x) const {
  if (!(x >= 0.0 && x <= 1.0)) throw Error(Errc::domain, "evaluation point outside [0,1]");
  return basis_.series(x, coeffs_);
}

void ProjectionEstimate::write_grid_csv(std::ostream &out, std::size_t points, bool clip) const {
  if (points < 2) throw Error(Errc::domain, "grid needs at least 2 points");
  out << "x,f_hat\n";
  const double step = 1.0 / static_cast<double>(points - 1);
  for (std::size_t i = 0; i < points; ++i) {
    const double x = i + 1 == points ? 1.0 : static_cast<double>(i) * step;
    double f = basis_.series(x, coeffs_);
    if (clip) f = std::max(f, 0.0);
    out << detail::format_double(x) << ',' << detail::format_double(f) << '\n';
  }
}

double coefficient_error_sq(const ProjectionEstimate &est, const DensityModel &model) {
  require_same_basis(est, model);
  const auto c = est.coefficients();
  double sum = 0.0;
  for (std::size_t k = 1; k <= c.size(); ++k) {
    const double d = c[k - 1] - model.coefficient(k);
    sum += d * d;
  }
  return sum;
}

double l2_error_sq(const ProjectionEstimate &est, const DensityModel &model) {
  return coefficient_error_sq(est, model) + model.tail_energy(est.order());
}

double risk_bound(const DensityModel &model, std::size_t N, std::uint64_t n) {
  if (N == 0 || n == 0) throw Error(Errc::domain, "risk bound needs N >= 1 and n >= 1");
  return model.basis().sup_bound() * static_cast<double>(N) / static_cast<double>(n) +
         model.tail_energy(N);
}

} // namespace projdens
