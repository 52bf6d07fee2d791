#include "demix/bandwidth.hpp"
#include "demix/errors.hpp"
#include "demix/orthopoly.hpp"

#include <algorithm>
#include <cmath>

namespace demix {

double lambda_ab(double a, double b)
{
  if (!(a < b) || !std::isfinite(a) || !std::isfinite(b))
    throw ValidationError("lambda_ab: requires finite a < b");
  const double g = (2 + a + b) / (b - a);
  return g + std::sqrt(g * g + 1);
}

int poisson_mn(double n, double tau)
{
  if (!(n >= 16))
    throw ValidationError("poisson_mn: n must be at least 16");
  if (!(tau > 0 && tau <= 1))
    throw ValidationError("poisson_mn: tau must lie in (0, 1]");
  const double l = std::log(n);
  return static_cast<int>(std::ceil(tau * l / std::log(l)));
}

FiniteRRule finiteR_rule(const PowerSeriesFamily& family,
                         double a,
                         double b,
                         double n,
                         std::optional<double> tau)
{
  const double R = family.radius();
  if (!std::isfinite(R))
    throw ValidationError("finiteR_rule: family radius must be finite");
  if (!(b < R) || a < 0)
    throw ValidationError("finiteR_rule: requires 0 <= a < b < R");
  if (!(n >= 1))
    throw ValidationError("finiteR_rule: n must be at least 1");
  const double lam = lambda_ab(a, b);
  const double tmax = 1 / std::log(lam * lam * std::max(1.0, b * R));
  const double t = tau.value_or(tmax / 2);
  if (!(t > 0 && t < tmax))
    throw ValidationError("finiteR_rule: tau must lie in (0, tau_max)");
  return { tmax, t, static_cast<int>(std::ceil(t * std::log(n))) };
}

double cond45(const PowerSeriesFamily& family, double a, double b, double lambda1, int m, double n)
{
  if (m < 1)
    throw ValidationError("cond45: m must be at least 1");
  if (!(n > 0))
    throw ValidationError("cond45: n must be positive");
  if (!(b > 0))
    throw ValidationError("cond45: b must be positive");
  if (!(lambda1 > lambda_ab(a, b)))
    throw ValidationError("cond45: lambda1 must exceed lambda(a, b)");
  Real best = -INFINITY;
  for (int k = 0; k < m; ++k)
    best = std::max(best, k * std::log(Real(b)) - family.log_a(k));
  return static_cast<double>(std::exp(2 * m * std::log(Real(lambda1)) + best - std::log(Real(n))));
}

double a2_constant(const PowerSeriesFamily& family, int kmax)
{
  if (kmax < 1)
    throw ValidationError("a2_constant: kmax must be positive");
  Real best = -INFINITY;
  for (int k = 0; k <= kmax; ++k)
    for (int l = 0; k + l <= kmax; ++l)
      best = std::max(best, family.log_a(k + l) - family.log_a(k) - family.log_a(l));
  return static_cast<double>(std::exp(best));
}

WnResult wn(const PowerSeriesFamily& family, const MeasureSpec& measure, int m, double n)
{
  if (m < 0 || !(n >= 0))
    throw ValidationError("wn: needs m >= 0 and n >= 0");
  const double tail = nu_pi_tail(family, measure, m, 1e-12);
  return { n * tail, n * tail_bound(family, measure, m, a2_constant(family)) };
}

double eta_guide(const PowerSeriesFamily& family, double b, double tau)
{
  const double R = family.radius();
  if (!std::isfinite(R) || !(b > 0 && b < R) || !(tau > 0))
    throw ValidationError("eta_guide: needs finite R, 0 < b < R and tau > 0");
  return -1 / (tau * std::log(b / R));
}

int halfline_mn(double n, double lambda1, const SmoothnessSeq& u)
{
  if (!(n >= 1))
    throw ValidationError("halfline_mn: n must be at least 1");
  if (!(lambda1 > halfline_growth_root()))
    throw ValidationError("halfline_mn: lambda1 must exceed the half-line growth root");
  const double cap = std::log(0.1 * std::sqrt(n));
  int best = 0;
  for (int m = 0; m < 10000; ++m) {
    if (m * std::log(lambda1) - std::log(u(m)) > cap)
      break;
    best = m;
  }
  return best;
}

DecayCheck decay_check(const std::vector<double>& ns, const std::vector<double>& values)
{
  if (ns.size() != values.size() || ns.size() < 2)
    throw ValidationError("decay_check: needs two or more matched points");
  double mx = 0, my = 0;
  const double N = static_cast<double>(ns.size());
  for (std::size_t i = 0; i < ns.size(); ++i) {
    if (!(ns[i] > 0) || !(values[i] > 0))
      throw ValidationError("decay_check: values must be positive");
    mx += std::log(ns[i]) / N;
    my += std::log(values[i]) / N;
  }
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < ns.size(); ++i) {
    const double dx = std::log(ns[i]) - mx;
    sxy += dx * (std::log(values[i]) - my);
    sxx += dx * dx;
  }
  const double slope = sxy / sxx;
  return { slope, slope < 0 && values.back() < values.front() };
}

} // namespace demix
