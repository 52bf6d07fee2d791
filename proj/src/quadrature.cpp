#include "demix/quadrature.hpp"
#include "demix/errors.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>

namespace demix {

namespace {

Rule compute_gauss_legendre(int n)
{
  Rule r;
  r.nodes.resize(n);
  r.weights.resize(n);
  const Real pi = std::numbers::pi_v<Real>;
  for (int i = 0; i < (n + 1) / 2; ++i) {
    Real x = std::cos(pi * (i + 0.75L) / (n + 0.5L));
    Real dp = 0;
    for (int it = 0; it < 100; ++it) {
      Real p0 = 1, p1 = x;
      for (int k = 2; k <= n; ++k) {
        Real p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) {
        p1 = x;
        p0 = 1;
      }
      dp = n * (x * p1 - p0) / (x * x - 1);
      Real dx = p1 / dp;
      x -= dx;
      if (std::fabs(dx) < 1e-21L)
        break;
    }
    Real p0 = 1, p1 = x;
    for (int k = 2; k <= n; ++k) {
      Real p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1);
    Real w = 2 / ((1 - x * x) * dp * dp);
    r.nodes[i] = -x;
    r.nodes[n - 1 - i] = x;
    r.weights[i] = w;
    r.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1)
    r.nodes[n / 2] = 0;
  return r;
}

void append_mapped(Rule& out, const Rule& ref, Real a, Real b)
{
  const Real h = (b - a) / 2, c = (a + b) / 2;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    out.nodes.push_back(c + h * ref.nodes[i]);
    out.weights.push_back(h * ref.weights[i]);
  }
}

} // namespace

const Rule& gauss_legendre(int n)
{
  if (n < 1)
    throw ValidationError("gauss_legendre: n must be positive");
  static std::mutex mu;
  static std::map<int, std::unique_ptr<Rule>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[n];
  if (!slot)
    slot = std::make_unique<Rule>(compute_gauss_legendre(n));
  return *slot;
}

Rule gauss_legendre(int n, Real a, Real b)
{
  Rule r;
  append_mapped(r, gauss_legendre(n), a, b);
  return r;
}

Rule composite_gauss_legendre(Real a, Real b, int panels, int order)
{
  const Rule& ref = gauss_legendre(order);
  Rule r;
  r.nodes.reserve(static_cast<std::size_t>(panels) * order);
  r.weights.reserve(static_cast<std::size_t>(panels) * order);
  for (int p = 0; p < panels; ++p)
    append_mapped(r, ref, a + (b - a) * p / panels, a + (b - a) * (p + 1) / panels);
  return r;
}

Rule graded_gauss_legendre(Real a, Real b, int order)
{
  const Rule& ref = gauss_legendre(order);
  Rule r;
  const Real w = b - a;
  // 15 equal panels on [a, a + 15w/16], then geometric panels toward b.
  for (int p = 0; p < 15; ++p)
    append_mapped(r, ref, a + w * p / 16, a + w * (p + 1) / 16);
  Real lo = a + w * 15 / 16, gap = w / 16;
  for (int j = 0; j < 48; ++j) {
    Real hi = b - gap / 2;
    append_mapped(r, ref, lo, hi);
    lo = hi;
    gap /= 2;
  }
  append_mapped(r, ref, lo, b);
  return r;
}

Rule halfline_rule(Real rate)
{
  if (!(rate > 0))
    throw ValidationError("halfline_rule: rate must be positive");
  return composite_gauss_legendre(0, 250 / rate, 200, 32);
}

} // namespace demix
