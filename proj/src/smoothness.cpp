#include "demix/smoothness.hpp"
#include "demix/errors.hpp"

#include <cmath>
#include <limits>

namespace demix {

SmoothnessSeq SmoothnessSeq::power(double alpha)
{
  if (!(alpha >= 0) || !std::isfinite(alpha))
    throw ValidationError("smoothness exponent must be nonnegative");
  SmoothnessSeq s;
  s.alpha_ = alpha;
  return s;
}

SmoothnessSeq SmoothnessSeq::tabulated(std::vector<double> values)
{
  if (values.empty())
    throw ValidationError("tabulated sequence is empty");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!(values[i] > 0))
      throw ValidationError("smoothness sequence must be positive");
    if (i > 0 && values[i] > values[i - 1])
      throw ValidationError("smoothness sequence must be non-increasing");
  }
  SmoothnessSeq s;
  s.table_ = std::move(values);
  return s;
}

double SmoothnessSeq::operator()(int m) const
{
  if (m < 0)
    throw ValidationError("smoothness index must be nonnegative");
  if (table_.empty())
    return std::pow(1.0 + m, -alpha_);
  if (static_cast<std::size_t>(m) >= table_.size())
    throw ValidationError("index beyond tabulated smoothness sequence");
  return table_[m];
}

std::vector<double> approx_error_seq(const Density& f,
                                     const PowerSeriesFamily& family,
                                     const MeasureSpec& measure,
                                     int m_max)
{
  if (m_max < 0)
    throw ValidationError("m_max must be nonnegative");
  auto basis = Basis::build(family, measure, m_max);
  auto res = residual_norms(f, *basis);
  for (int m = 1; m <= m_max; ++m)
    res[m] = std::min(res[m], res[m - 1]);
  return res;
}

std::vector<double> theta_grid(double a, double b, int points)
{
  if (!(a < b) || points < 2)
    throw ValidationError("theta_grid needs a < b and at least two points");
  std::vector<double> g(points);
  for (int i = 0; i < points; ++i)
    g[i] = a + (b - a) * i / (points - 1);
  return g;
}

namespace {

double ratio(double num, double den)
{
  num = std::fabs(num);
  if (den == 0)
    return num == 0 ? 0.0 : std::numeric_limits<double>::infinity();
  return num / den;
}

} // namespace

double sup_ratio_norm(const Density& f, const Density& f0, const std::vector<double>& grid)
{
  double best = 0;
  for (double t : grid)
    best = std::max(best, ratio(f(t), f0(t)));
  return best;
}

double k_inf(const Basis& basis,
             const std::vector<int>& rows,
             const Density& f0,
             const std::vector<double>& grid)
{
  for (int k : rows)
    if (k < 0 || k >= basis.m())
      throw ValidationError("k_inf: row index outside the basis");
  std::vector<Real> v(basis.m());
  double best = 0;
  for (double t : grid) {
    basis.eval(t, v.data());
    Real s = 0;
    for (int k : rows)
      s += v[k] * v[k];
    best = std::max(best, ratio(static_cast<double>(std::sqrt(s)), f0(t)));
  }
  return best;
}

Membership class_member(const Density& f,
                        const ClassSpec& spec,
                        const PowerSeriesFamily& family,
                        const MeasureSpec& measure,
                        int m_max)
{
  if (m_max < spec.r)
    throw ValidationError("class_member: m_max must be at least r");
  if (!(spec.C >= 0))
    throw ValidationError("class_member: C must be nonnegative");
  if (spec.K && !spec.f0)
    throw ValidationError("class_member: K requires f0");
  auto res = approx_error_seq(f, family, measure, m_max);
  const double slack = 1e-12 * std::max(1.0, res[0]);
  Membership out{ true, m_max, -1, 0.0 };
  for (int m = spec.r; m <= m_max; ++m) {
    if (res[m] > spec.C * spec.u(m) * (1 + 1e-12) + slack) {
      out.member = false;
      out.first_violation = m;
      break;
    }
  }
  if (spec.K) {
    out.sup_ratio = sup_ratio_norm(f, spec.f0, theta_grid(measure.a(), measure.b()));
    if (out.sup_ratio > *spec.K)
      out.member = false;
  }
  return out;
}

double lower_bound_rhs(const Density& f0,
                       const ClassSpec& spec,
                       const Basis& basis,
                       int m,
                       double n)
{
  if (!spec.K)
    throw ValidationError("lower_bound_rhs: class needs K");
  const double K = *spec.K;
  if (!(K > 0) || K > 1)
    throw ValidationError("lower_bound_rhs: requires 0 < K <= 1");
  if (m < spec.r || m < 0)
    throw ValidationError("lower_bound_rhs: requires m >= r");
  if (basis.m() < m + 2)
    throw ValidationError("lower_bound_rhs: basis needs m+2 rows");
  if (!(n >= 0))
    throw ValidationError("lower_bound_rhs: n must be nonnegative");
  const double kinf = k_inf(basis, { m, m + 1 }, f0, theta_grid(basis.lower(), basis.upper()));
  const double amp = std::min(K / kinf, spec.C * spec.u(m + 1));
  auto pi = mixture_probs(f0, basis, m);
  double mass = 0;
  for (double p : pi)
    mass += p;
  mass = std::min(mass, 1.0);
  return amp * amp * std::pow(mass, n);
}

double upper_bound_rhs(const Density& f_inf,
                       double K,
                       const SmoothnessSeq& u,
                       double C,
                       const Basis& basis,
                       double n)
{
  const double bias = C * u(basis.m());
  return bias * bias + variance_bound(f_inf, K, basis, n);
}

double SmoothDensity::alpha(int k) const
{
  if (k < 0 || k >= static_cast<int>(log_alpha.size()))
    return 0;
  return static_cast<double>(std::exp(log_alpha[k]));
}

double SmoothDensity::operator()(double theta) const
{
  if (theta < measure.a() || theta > measure.b() || log_alpha.empty())
    return 0;
  if (theta == 0)
    return static_cast<double>(std::exp(log_alpha[0]));
  const Real lt = std::log(Real(theta)), lz = family.log_Z(theta);
  Real s = 0;
  for (std::size_t k = 0; k < log_alpha.size(); ++k)
    s += std::exp(log_alpha[k] + family.log_a(static_cast<int>(k)) + k * lt - lz);
  return static_cast<double>(s);
}

Density SmoothDensity::as_density() const
{
  return [self = *this](double t) { return self(t); };
}

SmoothDensity smooth_density_factory(const PowerSeriesFamily& family,
                                     const MeasureSpec& measure,
                                     const SmoothnessSeq& u,
                                     int r,
                                     double C,
                                     int k_max)
{
  if (measure.kind() != MeasureSpec::Kind::interval || measure.a() < 0 ||
      !(measure.b() < family.radius()))
    throw ValidationError("smooth_density_factory: needs an interval in [0, R)");
  if (r < 0)
    throw ValidationError("smooth_density_factory: r must be nonnegative");
  if (!(C > 0))
    throw ValidationError("smooth_density_factory: C must be positive");
  if (k_max < 1)
    throw ValidationError("smooth_density_factory: k_max must be at least 1");

  // β_k = (v_k − v_{k+1}) / max(‖Π1_k‖, νΠ1_k) with v = u, kept in logs.
  const Real tol = 1e-10L * u(0);
  std::vector<Real> log_beta, nu, bnu, term;
  for (int k = 0; k <= k_max; ++k) {
    const Real dv = Real(u(k)) - Real(u(k + 1));
    if (!(dv > 0))
      throw ValidationError("smooth_density_factory: u must be strictly decreasing");
    const Real ln = log_nu_pi(family, measure, k), lp = log_pi_norm(family, measure, k);
    const Real lb = std::log(dv) - std::max(ln, lp);
    log_beta.push_back(lb);
    nu.push_back(std::exp(ln));
    bnu.push_back(std::exp(lb + ln));
    term.push_back(std::exp(lb + lp));
    // Once terms are far below the tolerance and shrinking, the rest is negligible.
    if (k > 10 && term[k] < 1e-6L * tol && term[k] < term[k - 1])
      break;
  }
  // Smallest K whose computed tail is below the tolerance.
  const int last = static_cast<int>(log_beta.size()) - 1;
  int K = last;
  Real tail = 0, suffix = 0;
  for (int k = last; k >= 0; --k) {
    if (suffix >= tol)
      break;
    K = k;
    tail = suffix;
    suffix += term[k];
  }
  // Stopped by the cap: terms beyond it are only known through
  // Σ_{k>k_max} β_k‖Π1_k‖ ≤ u_{k_max+1}.
  if (last == k_max)
    tail += u(k_max + 1);

  SmoothDensity out;
  out.family = family;
  out.measure = measure;
  out.k_max = K;
  out.tail = static_cast<double>(tail);
  out.log_alpha.assign(K + 1, 0);
  Real S1 = 0;
  for (int k = 1; k <= K; ++k)
    S1 += bnu[k];
  if (r >= 1) {
    const Real lambda = std::min(Real(C), 0.5L / S1);
    for (int k = 1; k <= K; ++k)
      out.log_alpha[k] = std::log(lambda) + log_beta[k];
    out.log_alpha[0] = std::log((1 - lambda * S1) / nu[0]);
    out.class_constant = static_cast<double>(lambda);
  } else {
    const Real S0 = S1 + bnu[0];
    const Real C0 = 1 / S0;
    if (C < C0)
      throw ValidationError("smooth_density_factory: r = 0 requires C >= C0 = " +
                            std::to_string(static_cast<double>(C0)));
    for (int k = 0; k <= K; ++k)
      out.log_alpha[k] = std::log(C0) + log_beta[k];
    out.class_constant = static_cast<double>(C0);
  }
  return out;
}

double TwoPointFixture::operator()(double theta) const
{
  std::vector<Real> v(basis->m());
  basis->eval(theta, v.data());
  return static_cast<double>(alpha * v[m] + beta * v[m + 1]);
}

TwoPointFixture two_point_fixture(BasisPtr basis, int m, double target_norm)
{
  if (m < 0 || basis->m() < m + 2)
    throw ValidationError("two_point_fixture: basis needs m+2 rows");
  if (!(target_norm >= 0))
    throw ValidationError("two_point_fixture: target_norm must be nonnegative");
  const Rule& rule = basis->rule();
  const auto& pn = basis->basis_nodes();
  const int M = basis->m();
  Real Im = 0, Im1 = 0;
  for (std::size_t i = 0; i < rule.size(); ++i) {
    Im += rule.weights[i] * pn[i * M + m];
    Im1 += rule.weights[i] * pn[i * M + m + 1];
  }
  const Real norm = std::sqrt(Im * Im + Im1 * Im1);
  if (!(norm > 0))
    throw NumericalError("two_point_fixture: both ν-integrals vanish");
  TwoPointFixture f;
  f.m = m;
  f.basis = basis;
  f.alpha = static_cast<double>(target_norm * Im1 / norm);
  f.beta = static_cast<double>(-target_norm * Im / norm);
  return f;
}

double weighted_modulus(const Density& f, int r, double t, double a, double b)
{
  if (r < 1)
    throw ValidationError("weighted_modulus: r must be positive");
  if (!(t > 0))
    throw ValidationError("weighted_modulus: t must be positive");
  if (!(a < b))
    throw ValidationError("weighted_modulus: needs a < b");
  const Rule rule = composite_gauss_legendre(a, b, 64, 8);
  std::vector<double> binom(r + 1, 1.0);
  for (int i = 1; i <= r; ++i)
    binom[i] = binom[i - 1] * (r - i + 1) / i;
  double best = 0;
  for (int j = 0; j < 256; ++j) {
    const double h = t * std::pow(10.0, -4.0 * (255 - j) / 255.0);
    Real s = 0;
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const double x = static_cast<double>(rule.nodes[q]);
      const double step = h * std::sqrt((x - a) * (b - x));
      const double half = 0.5 * r * step;
      if (x - half < a || x + half > b)
        continue;
      double d = 0;
      for (int i = 0; i <= r; ++i)
        d += ((r - i) % 2 ? -1.0 : 1.0) * binom[i] * f(x + (i - 0.5 * r) * step);
      s += rule.weights[q] * d * d;
    }
    best = std::max(best, static_cast<double>(std::sqrt(s)));
  }
  return best;
}

} // namespace demix
