// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "projdens/basis.hpp"

#include <cstddef>
#include <functional>
#include <vector>

namespace projdens {

/// Composite Gauss-Legendre rule on [a,b]: `panels` equal sub-intervals with
/// `nodes_per_panel` nodes each. Used by tests and verification only.
class QuadratureRule {
public:
  QuadratureRule(std::size_t panels, std::size_t nodes_per_panel);

  std::size_t panels() const noexcept { return panels_; }
  std::size_t nodes_per_panel() const noexcept { return nodes_.size(); }

  double integrate(const std::function<double(double)> &f, double a = 0.0,
                   double b = 1.0) const;

  /// Nodes and weights on the reference interval [-1,1].
  const std::vector<double> &nodes() const noexcept { return nodes_; }
  const std::vector<double> &weights() const noexcept { return weights_; }

private:
  std::size_t panels_;
  std::vector<double> nodes_;
  std::vector<double> weights_;
};

struct GramResult {
  double value;
  // false when the rule has fewer than 4*max(j,k) panels; the value is still
  // computed but carries no accuracy guarantee
  bool resolved;
};

GramResult gram_entry(const BasisSystem &basis, std::size_t j, std::size_t k,
                      const QuadratureRule &rule);

} // namespace projdens
