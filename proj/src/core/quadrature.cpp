// SPDX-License-Identifier: Apache-2.0
#include "projdens/quadrature.hpp"

#include "projdens/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace projdens {

QuadratureRule::QuadratureRule(std::size_t panels, std::size_t nodes_per_panel)
    : panels_(panels) {
  if (panels == 0 || nodes_per_panel == 0)
    throw Error(Errc::config, "quadrature needs at least one panel and one node");
  const std::size_t m = nodes_per_panel;
  nodes_.resize(m);
  weights_.resize(m);
  // Newton iteration on P_m from the Chebyshev-like initial guess; nodes are
  // symmetric so only the upper half is solved for.
  for (std::size_t i = 0; i < (m + 1) / 2; ++i) {
    double z = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) /
                        (static_cast<double>(m) + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = 0.0;
      for (std::size_t j = 1; j <= m; ++j) {
        const double p2 = p1;
        p1 = p0;
        const double jd = static_cast<double>(j);
        p0 = ((2.0 * jd - 1.0) * z * p1 - (jd - 1.0) * p2) / jd;
      }
      dp = static_cast<double>(m) * (z * p0 - p1) / (z * z - 1.0);
      const double dz = p0 / dp;
      z -= dz;
      if (std::fabs(dz) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - z * z) * dp * dp);
    nodes_[i] = -z;
    nodes_[m - 1 - i] = z;
    weights_[i] = w;
    weights_[m - 1 - i] = w;
  }
  if (m % 2 == 1) nodes_[m / 2] = 0.0;
}

double QuadratureRule::integrate(const std::function<double(double)> &f, double a,
                                 double b) const {
  const double h = (b - a) / static_cast<double>(panels_);
  double total = 0.0;
  for (std::size_t p = 0; p < panels_; ++p) {
    const double lo = a + h * static_cast<double>(p);
    const double mid = lo + 0.5 * h;
    double panel = 0.0;
    for (std::size_t i = 0; i < nodes_.size(); ++i)
      panel += weights_[i] * f(mid + 0.5 * h * nodes_[i]);
    total += 0.5 * h * panel;
  }
  return total;
}

GramResult gram_entry(const BasisSystem &basis, std::size_t j, std::size_t k,
                      const QuadratureRule &rule) {
  if (j == 0 || k == 0) throw Error(Errc::domain, "basis index must be >= 1");
  const double value = rule.integrate(
      [&](double x) { return basis.evaluate(j, x) * basis.evaluate(k, x); });
  return {value, rule.panels() >= 4 * std::max(j, k)};
}

} // namespace projdens
