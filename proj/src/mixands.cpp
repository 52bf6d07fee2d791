#include "demix/mixands.hpp"
#include "demix/errors.hpp"

#include <cmath>
#include <limits>
#include <mutex>

namespace demix {

struct PowerSeriesFamily::Impl
{
  enum class Kind
  {
    poisson,
    negbin,
    custom
  } kind;
  std::string name;
  double radius;
  double shape = 1;
  std::function<double(int)> a;
  mutable std::mutex mu;
  mutable std::vector<Real> log_a_cache;

  Real log_a(int k) const
  {
    if (k < 0)
      throw ValidationError("coefficient index must be nonnegative");
    switch (kind) {
      case Kind::poisson:
        return -std::lgamma(Real(k) + 1);
      case Kind::negbin:
        return std::lgamma(Real(shape) + k) - std::lgamma(Real(shape)) -
               std::lgamma(Real(k) + 1);
      case Kind::custom:
        break;
    }
    std::lock_guard<std::mutex> lock(mu);
    while (static_cast<int>(log_a_cache.size()) <= k) {
      int j = static_cast<int>(log_a_cache.size());
      double v = a(j);
      if (!(v > 0) || !std::isfinite(v))
        throw ValidationError(name + ": a(" + std::to_string(j) + ") must be positive");
      log_a_cache.push_back(std::log(Real(v)));
    }
    return log_a_cache[k];
  }

  Real log_Z(Real t) const
  {
    if (!(t >= 0) || !(t < radius))
      throw ValidationError(name + ": argument outside [0, R)");
    switch (kind) {
      case Kind::poisson:
        return t;
      case Kind::negbin:
        return -Real(shape) * std::log1p(-t);
      case Kind::custom:
        break;
    }
    if (t == 0)
      return 0;
    // Partial sums with relative tail tolerance 1e-14, in log space.
    const Real lt = std::log(t);
    Real mx = -std::numeric_limits<Real>::infinity(), s = 0;
    int small = 0;
    for (int k = 0; k < 100000; ++k) {
      Real lv = log_a(k) + k * lt;
      if (lv > mx) {
        s = s * std::exp(mx - lv) + 1;
        mx = lv;
      } else {
        Real r = std::exp(lv - mx);
        s += r;
        if (r < 1e-14L * s) {
          if (++small >= 8)
            return mx + std::log(s);
          continue;
        }
      }
      small = 0;
    }
    throw NumericalError(name + ": Z series did not converge");
  }
};

PowerSeriesFamily PowerSeriesFamily::poisson()
{
  auto p = std::make_shared<Impl>();
  p->kind = Impl::Kind::poisson;
  p->name = "poisson";
  p->radius = INFINITY;
  PowerSeriesFamily f;
  f.impl_ = p;
  return f;
}

PowerSeriesFamily PowerSeriesFamily::negative_binomial(double shape)
{
  if (!(shape > 0) || !std::isfinite(shape))
    throw ValidationError("negative binomial shape must be positive");
  auto p = std::make_shared<Impl>();
  p->kind = Impl::Kind::negbin;
  p->name = shape == 1.0 ? "geometric" : "negbin";
  p->radius = 1;
  p->shape = shape;
  PowerSeriesFamily f;
  f.impl_ = p;
  return f;
}

PowerSeriesFamily PowerSeriesFamily::custom(std::string name,
                                            std::function<double(int)> a,
                                            double radius)
{
  if (!a)
    throw ValidationError("custom family needs a coefficient callable");
  if (!(radius > 0))
    throw ValidationError("custom family radius must be positive");
  if (a(0) != 1.0)
    throw ValidationError("custom family requires a(0) = 1");
  auto p = std::make_shared<Impl>();
  p->kind = Impl::Kind::custom;
  p->name = std::move(name);
  p->radius = radius;
  p->a = std::move(a);
  PowerSeriesFamily f;
  f.impl_ = p;
  return f;
}

const std::string& PowerSeriesFamily::name() const { return impl_->name; }
double PowerSeriesFamily::radius() const { return impl_->radius; }
bool PowerSeriesFamily::is_poisson() const { return impl_->kind == Impl::Kind::poisson; }
double PowerSeriesFamily::shape() const { return impl_->shape; }
Real PowerSeriesFamily::log_a(int k) const { return impl_->log_a(k); }
Real PowerSeriesFamily::a(int k) const { return std::exp(impl_->log_a(k)); }
Real PowerSeriesFamily::log_Z(Real t) const { return impl_->log_Z(t); }
Real PowerSeriesFamily::Z(Real t) const { return std::exp(impl_->log_Z(t)); }

double ps_pmf(const PowerSeriesFamily& family, double theta, int k)
{
  if (!(theta >= 0) || !(theta < family.radius()))
    throw ValidationError("ps_pmf: theta outside [0, R)");
  if (k < 0)
    return 0;
  if (theta == 0)
    return k == 0 ? 1.0 : 0.0;
  Real lv = family.log_a(k) + k * std::log(Real(theta)) - family.log_Z(theta);
  return static_cast<double>(std::exp(lv));
}

double ps_Z(const PowerSeriesFamily& family, double t)
{
  return static_cast<double>(family.Z(t));
}

namespace {

void require_integrable(const PowerSeriesFamily& family, const MeasureSpec& measure)
{
  if (measure.kind() != MeasureSpec::Kind::interval)
    throw ValidationError("requires a Lebesgue-interval measure");
  if (measure.a() < 0)
    throw ValidationError("parameter interval must lie in [0, R)");
  if (!(measure.b() < family.radius()))
    throw ValidationError("requires b < R");
}

// log ∫_a^b exp(c + p·log θ − q·log Z(θ)) dθ, max-shifted so huge or tiny
// magnitudes survive.
Real log_power_integral(const PowerSeriesFamily& family,
                        const MeasureSpec& measure,
                        Real c,
                        int p,
                        int q)
{
  Rule rule = graded_gauss_legendre(measure.a(), measure.b());
  std::vector<Real> g(rule.size());
  Real mx = -std::numeric_limits<Real>::infinity();
  for (std::size_t i = 0; i < rule.size(); ++i) {
    Real t = rule.nodes[i];
    if (t <= 0)
      g[i] = p == 0 ? c : -std::numeric_limits<Real>::infinity();
    else
      g[i] = c + p * std::log(t) - q * family.log_Z(t);
    mx = std::max(mx, g[i]);
  }
  Real s = 0;
  for (std::size_t i = 0; i < rule.size(); ++i)
    s += rule.weights[i] * std::exp(g[i] - mx);
  return mx + std::log(s);
}

} // namespace

double nu_pi(const PowerSeriesFamily& family, const MeasureSpec& measure, int k)
{
  require_integrable(family, measure);
  if (k < 0)
    throw ValidationError("nu_pi: k must be nonnegative");
  return static_cast<double>(std::exp(log_nu_pi(family, measure, k)));
}

Real log_nu_pi(const PowerSeriesFamily& family, const MeasureSpec& measure, int k)
{
  require_integrable(family, measure);
  if (k < 0)
    throw ValidationError("nu_pi: k must be nonnegative");
  return log_power_integral(family, measure, family.log_a(k), k, 1);
}

Real log_pi_norm(const PowerSeriesFamily& family, const MeasureSpec& measure, int k)
{
  require_integrable(family, measure);
  if (k < 0)
    throw ValidationError("pi_norm: k must be nonnegative");
  return log_power_integral(family, measure, 2 * family.log_a(k), 2 * k, 2) / 2;
}

double pi_norm(const PowerSeriesFamily& family, const MeasureSpec& measure, int k)
{
  require_integrable(family, measure);
  if (k < 0)
    throw ValidationError("pi_norm: k must be nonnegative");
  return static_cast<double>(std::exp(log_pi_norm(family, measure, k)));
}

double nu_pi_tail(const PowerSeriesFamily& family,
                  const MeasureSpec& measure,
                  int m,
                  double tol)
{
  require_integrable(family, measure);
  Real s = 0;
  for (int k = std::max(m, 0); k < m + 100000; ++k) {
    Real t = nu_pi(family, measure, k);
    s += t;
    if (k > m + 2 && t < tol * s)
      return static_cast<double>(s);
    if (s == 0 && k > m + 50)
      return 0;
  }
  throw NumericalError("nu_pi_tail: tail sum did not converge");
}

double tail_bound(const PowerSeriesFamily& family,
                  const MeasureSpec& measure,
                  int m,
                  double c0)
{
  require_integrable(family, measure);
  if (!(c0 > 0))
    throw ValidationError("tail_bound: c0 must be positive");
  if (m < 0)
    throw ValidationError("tail_bound: m must be nonnegative");
  const Real a = measure.a(), b = measure.b();
  Real mom = (std::pow(b, m + 1) - std::pow(a, m + 1)) / (m + 1);
  return static_cast<double>(c0 * family.a(m) * mom);
}

A2Check check_A2(const PowerSeriesFamily& family, double c0, int kmax)
{
  if (!(c0 > 0))
    throw ValidationError("check_A2: c0 must be positive");
  if (kmax < 2)
    throw ValidationError("check_A2: kmax must be at least 2");
  const Real lc = std::log(Real(c0));
  bool holds = true;
  for (int k = 0; k <= kmax && holds; ++k)
    for (int l = 0; k + l <= kmax; ++l) {
      Real lhs = family.log_a(k + l), rhs = lc + family.log_a(k) + family.log_a(l);
      if (lhs > rhs + 1e-12L * (1 + std::fabs(rhs))) {
        holds = false;
        break;
      }
    }
  Real L = std::numeric_limits<Real>::infinity();
  for (int n = 1; n <= kmax; ++n)
    L = std::min(L, (lc + family.log_a(n)) / n);
  return { holds, static_cast<double>(L) };
}

double uniform_pmf(std::int64_t theta, std::int64_t k)
{
  if (theta < 1)
    throw ValidationError("uniform_pmf: theta must be at least 1");
  return (k >= 0 && k < theta) ? 1.0 / static_cast<double>(theta) : 0.0;
}

double IntegerPmf::operator()(std::int64_t k) const
{
  if (k < lo() || k > hi())
    return 0;
  return probs[static_cast<std::size_t>(k - offset)];
}

NoisePmf make_noise_pmf(std::int64_t offset, std::vector<double> probs)
{
  if (probs.empty())
    throw ValidationError("pmf needs at least one value");
  double s = 0;
  for (double p : probs) {
    if (!(p >= 0) || !std::isfinite(p))
      throw ValidationError("pmf values must be nonnegative");
    s += p;
  }
  if (std::fabs(s - 1) > 1e-12)
    throw ValidationError("pmf must sum to 1 within 1e-12");
  return { offset, std::move(probs) };
}

void EmpiricalCounts::add(std::int64_t k, std::uint64_t count)
{
  if (k < 0)
    throw ValidationError("observations must be nonnegative integers");
  if (count == 0)
    return;
  if (static_cast<std::size_t>(k) >= counts_.size())
    counts_.resize(static_cast<std::size_t>(k) + 1, 0);
  counts_[static_cast<std::size_t>(k)] += count;
  n_ += count;
}

EmpiricalCounts EmpiricalCounts::from_map(const std::map<std::int64_t, std::int64_t>& counts)
{
  EmpiricalCounts c;
  for (auto [k, v] : counts) {
    if (v < 0)
      throw ValidationError("counts must be nonnegative");
    c.add(k, static_cast<std::uint64_t>(v));
  }
  return c;
}

EmpiricalCounts EmpiricalCounts::from_observations(const std::vector<std::int64_t>& xs)
{
  EmpiricalCounts c;
  for (auto x : xs)
    c.add(x);
  return c;
}

std::uint64_t EmpiricalCounts::count(std::int64_t k) const
{
  if (k < 0 || static_cast<std::size_t>(k) >= counts_.size())
    return 0;
  return counts_[static_cast<std::size_t>(k)];
}

double EmpiricalCounts::frequency(std::int64_t k) const
{
  if (n_ == 0)
    return 0;
  return static_cast<double>(count(k)) / static_cast<double>(n_);
}

} // namespace demix
