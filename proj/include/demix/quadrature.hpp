#pragma once

#include "demix/precision.hpp"
#include <vector>

namespace demix {

//! Nodes and weights of a quadrature rule; weights already include any
//! density of the target measure.
struct Rule
{
  std::vector<Real> nodes;
  std::vector<Real> weights;

  std::size_t size() const { return nodes.size(); }
};

//! n-point Gauss-Legendre rule on [-1, 1]. Cached, thread-safe.
const Rule& gauss_legendre(int n);

//! Gauss-Legendre mapped to [a, b].
Rule gauss_legendre(int n, Real a, Real b);

//! `panels` equal panels on [a, b], `order` nodes each.
Rule composite_gauss_legendre(Real a, Real b, int panels, int order);

//! Panels refined geometrically toward b; used for θ^k-type integrands
//! that concentrate at the right end for large k.
Rule graded_gauss_legendre(Real a, Real b, int order = 24);

//! Lebesgue measure on [0, ∞), truncated where e^{-rate·t} is negligible
//! for polynomial factors up to degree ~60.
Rule halfline_rule(Real rate);

//! Σ w_i g(x_i).
template<class F>
Real integrate(const Rule& rule, F&& g)
{
  Real s = 0;
  for (std::size_t i = 0; i < rule.size(); ++i)
    s += rule.weights[i] * g(rule.nodes[i]);
  return s;
}

} // namespace demix
