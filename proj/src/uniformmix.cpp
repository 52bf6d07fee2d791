#include "demix/uniformmix.hpp"
#include "demix/errors.hpp"

#include <cmath>

namespace demix {

namespace {

void check_theta_pmf(const ThetaPmf& f)
{
  for (double v : f)
    if (!std::isfinite(v))
      throw ValidationError("mixing pmf has non-finite entries");
}

} // namespace

std::vector<double> estimate_uniform(const EmpiricalCounts& counts, int m)
{
  if (m < 1)
    throw ValidationError("estimate_uniform: m must be at least 1");
  if (counts.empty())
    throw ValidationError("estimate_uniform: empty counts");
  const double n = static_cast<double>(counts.n());
  std::vector<double> f(m);
  for (int k = 1; k <= m; ++k) {
    const double d = static_cast<double>(counts.count(k - 1)) - static_cast<double>(counts.count(k));
    f[k - 1] = k * d / n;
  }
  return f;
}

double uniform_mixture_pmf(const ThetaPmf& f, std::int64_t k)
{
  if (k < 0)
    return 0;
  long double s = 0;
  for (std::size_t i = static_cast<std::size_t>(k); i < f.size(); ++i)
    s += f[i] / static_cast<long double>(i + 1);
  return static_cast<double>(s);
}

double mise_bound_uniform(const ThetaPmf& f, int m, double n)
{
  if (m < 0)
    throw ValidationError("mise_bound_uniform: m must be nonnegative");
  if (!(n > 0))
    throw ValidationError("mise_bound_uniform: n must be positive");
  check_theta_pmf(f);
  long double bias = 0;
  for (std::size_t i = static_cast<std::size_t>(m); i < f.size(); ++i)
    bias += static_cast<long double>(f[i]) * f[i];
  // π_f(k) for k = 0..m by a backward sum.
  std::vector<long double> pi(m + 2, 0);
  long double acc = 0;
  for (std::size_t i = f.size(); i-- > 0;) {
    acc += f[i] / static_cast<long double>(i + 1);
    if (i <= static_cast<std::size_t>(m))
      pi[i] = acc;
  }
  long double var = 0;
  for (int k = 0; k < m; ++k)
    var += static_cast<long double>(k + 1) * (k + 1) * (pi[k] + pi[k + 1]);
  return static_cast<double>(bias + var / n);
}

double mise_bound_uniform(const std::function<double(std::int64_t)>& f,
                          int m,
                          double n,
                          std::int64_t max_theta)
{
  ThetaPmf v;
  long double mass = 0;
  for (std::int64_t t = 1; t <= max_theta; ++t) {
    const double x = f(t);
    v.push_back(x);
    mass += x;
    if (t > m && mass >= 1 - 1e-12L)
      break;
  }
  return mise_bound_uniform(v, m, n);
}

MiseDecomposition exact_mise_uniform(const ThetaPmf& f, int m, double n)
{
  if (m < 0 || !(n > 0))
    throw ValidationError("exact_mise_uniform: needs m >= 0 and n > 0");
  check_theta_pmf(f);
  long double bias = 0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const long double fk = f[i];
    if (static_cast<int>(i) >= m)
      bias += fk * fk;
  }
  // f̂(k) = k(P_n1_{k−1} − P_n1_k) has mean k(π(k−1) − π(k)) and variance
  // k²(π(k−1) + π(k) − (π(k−1) − π(k))²)/n.
  long double var = 0, mean_bias = 0;
  for (int k = 1; k <= m; ++k) {
    const long double a = uniform_mixture_pmf(f, k - 1), b = uniform_mixture_pmf(f, k);
    const long double fk = static_cast<std::size_t>(k - 1) < f.size() ? f[k - 1] : 0.0;
    var += static_cast<long double>(k) * k * (a + b - (a - b) * (a - b));
    mean_bias += std::pow(k * (a - b) - fk, 2);
  }
  const double b = static_cast<double>(bias + mean_bias), v = static_cast<double>(var / n);
  return { b, v, b + v };
}

ThetaPmf UniformFixture::plus() const
{
  ThetaPmf f = f0;
  for (int i = 0; i < 3; ++i)
    f[m - 1 + i] += g[i];
  return f;
}

ThetaPmf UniformFixture::minus() const
{
  ThetaPmf f = f0;
  for (int i = 0; i < 3; ++i)
    f[m - 1 + i] -= g[i];
  return f;
}

UniformFixture fixture_g(int m, double C, double u_next)
{
  if (m < 2)
    throw ValidationError("fixture_g: m must be at least 2");
  if (!(C >= 0) || !(u_next > 0))
    throw ValidationError("fixture_g: needs C >= 0 and u_next > 0");
  // Cross product of (1,1,1) and (1/θ) spans the solutions of both constraints.
  const long double x = 1.0L / m, y = 1.0L / (m + 1), z = 1.0L / (m + 2);
  std::array<long double, 3> d{ z - y, x - z, y - x };
  const long double len = std::sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]);
  const long double scale = 0.5L * C * u_next / len * (d[0] > 0 ? 1 : -1);
  UniformFixture out;
  out.m = m;
  long double abs_sum = 0;
  for (int i = 0; i < 3; ++i) {
    out.g[i] = static_cast<double>(d[i] * scale);
    abs_sum += std::fabs(d[i] * scale);
  }
  if (abs_sum > 1)
    throw ValidationError("fixture_g: C u_next too large, f0(1) would be negative");
  out.f0.assign(m + 2, 0.0);
  for (int i = 0; i < 3; ++i)
    out.f0[m - 1 + i] = std::fabs(out.g[i]);
  out.f0[0] = static_cast<double>(1 - abs_sum);
  return out;
}

int bandwidth_uniform(double n, double tau, double beta)
{
  if (!(beta > 0 && beta < 0.5))
    throw ValidationError("bandwidth_uniform: beta must lie in (0, 1/2)");
  if (!(tau > 0))
    throw ValidationError("bandwidth_uniform: tau must be positive");
  if (!(n >= 1))
    throw ValidationError("bandwidth_uniform: n must be at least 1");
  return static_cast<int>(std::ceil(tau * std::pow(n, beta)));
}

double uniform_lower_bound(double C, double u_next, int m, double n)
{
  if (m < 1 || !(n >= 0))
    throw ValidationError("uniform_lower_bound: needs m >= 1 and n >= 0");
  const double a = C * u_next / 2;
  const double base = 1 - std::sqrt(5.0) / (2 * m) * C * u_next;
  if (base < 0)
    throw ValidationError("uniform_lower_bound: C u_{m+1} too large for this m");
  return a * a * std::pow(base, n);
}

double uniform_upper_bound(double C, double u_m, int m, double n)
{
  if (m < 0 || !(n > 0))
    throw ValidationError("uniform_upper_bound: needs m >= 0 and n > 0");
  return C * u_m * C * u_m + 2.0 * m * m / n;
}

} // namespace demix
