#pragma once

#include <vector>

namespace spdest {

/// Gauss-Legendre rule mapped to [0, 1].
struct GaussLegendreRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Nodes and weights of the n-point Gauss-Legendre rule on [0, 1], computed
/// by Newton iteration on P_n. Rules are cached per order.
const GaussLegendreRule& gauss_legendre(int order);

}  // namespace spdest
