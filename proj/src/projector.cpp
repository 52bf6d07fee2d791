#include "demix/projector.hpp"
#include "demix/errors.hpp"

#include <boost/multiprecision/eigen.hpp>
#include <Eigen/Dense>
#include <cfloat>
#include <cmath>
#include <limits>

namespace demix {

namespace {

void check_degree(int m, bool allow_beyond_ceiling)
{
  if (m < 0)
    throw ValidationError("m must be nonnegative");
  if (m > default_max_degree && !allow_beyond_ceiling)
    throw PrecisionError("m=" + std::to_string(m) + " exceeds the precision ceiling " +
                         std::to_string(default_max_degree));
}

std::vector<Real> frequencies(const EmpiricalCounts& counts, int m)
{
  if (counts.empty())
    throw ValidationError("empty counts");
  std::vector<Real> f(std::max(m, 0), 0);
  const Real n = static_cast<Real>(counts.n());
  for (int l = 0; l < m; ++l)
    f[l] = static_cast<Real>(counts.count(l)) / n;
  return f;
}

std::vector<Real> sample_at_nodes(const Density& f, const Rule& rule)
{
  std::vector<Real> v(rule.size());
  for (std::size_t i = 0; i < rule.size(); ++i)
    v[i] = f(static_cast<double>(rule.nodes[i]));
  return v;
}

struct ProjectionL
{
  std::vector<Real> c;
  Real norm_sq;
};

ProjectionL project_values(const std::vector<Real>& fv, const Basis& basis)
{
  const int m = basis.m();
  const auto& w = basis.rule().weights;
  const auto& pn = basis.basis_nodes();
  ProjectionL p{ std::vector<Real>(m, 0), 0 };
  for (std::size_t i = 0; i < fv.size(); ++i) {
    p.norm_sq += w[i] * fv[i] * fv[i];
    for (int k = 0; k < m; ++k)
      p.c[k] += w[i] * fv[i] * pn[i * m + k];
  }
  return p;
}

std::vector<Real> mixture_probs_values(const std::vector<Real>& fv, const Basis& basis, int count)
{
  const Rule& rule = basis.rule();
  const auto& zt = basis.ztilde_nodes();
  std::vector<Real> pi(std::max(count, 0), 0);
  for (int x = 0; x < count; ++x) {
    const Real la = basis.family().log_a(x);
    Real s = 0;
    for (std::size_t i = 0; i < rule.size(); ++i) {
      const Real t = rule.nodes[i];
      Real px;
      if (t <= 0)
        px = x == 0 ? Real(1) : Real(0);
      else
        px = std::exp(la + x * std::log(t));
      s += rule.weights[i] * fv[i] * px * zt[i];
    }
    pi[x] = s;
  }
  return pi;
}

} // namespace

std::shared_ptr<const Basis> Basis::build(const PowerSeriesFamily& family,
                                          const MeasureSpec& measure,
                                          int m,
                                          bool allow_beyond_ceiling)
{
  check_degree(m, allow_beyond_ceiling);
  if (measure.kind() != MeasureSpec::Kind::interval)
    throw ValidationError("basis requires a Lebesgue-interval measure");
  if (measure.a() < 0)
    throw ValidationError("parameter interval must lie in [0, R)");
  if (!(measure.b() < family.radius()))
    throw ValidationError("basis requires b < R");

  std::shared_ptr<Basis> b(new Basis());
  b->family_ = family;
  b->measure_ = measure;
  b->lower_ = measure.a();
  b->upper_ = measure.b();
  b->m_ = m;
  b->rule_ = gauss_legendre(256, measure.a(), measure.b());
  b->zt_.resize(b->rule_.size());
  for (std::size_t i = 0; i < b->rule_.size(); ++i)
    b->zt_[i] = std::exp(-family.log_Z(b->rule_.nodes[i]));
  if (m > 0) {
    Rule nu_prime = b->rule_;
    for (std::size_t i = 0; i < nu_prime.size(); ++i)
      nu_prime.weights[i] *= b->zt_[i] * b->zt_[i];
    b->rec_ = stieltjes(nu_prime, m);
    b->Q_ = orthonormal_coeffs(b->rec_, m, allow_beyond_ceiling);
  }
  b->finish();
  return b;
}

std::shared_ptr<const Basis> Basis::halfline(int m, bool allow_beyond_ceiling)
{
  check_degree(m, allow_beyond_ceiling);
  std::shared_ptr<Basis> b(new Basis());
  b->family_ = PowerSeriesFamily::poisson();
  b->measure_ = MeasureSpec::exp_weight(2);
  b->half_line_ = true;
  b->lower_ = 0;
  b->upper_ = INFINITY;
  b->m_ = m;
  b->rule_ = halfline_rule(1);
  b->zt_.resize(b->rule_.size());
  for (std::size_t i = 0; i < b->rule_.size(); ++i)
    b->zt_[i] = std::exp(-b->rule_.nodes[i]);
  if (m > 0) {
    b->rec_ = recurrence_for(b->measure_, m);
    b->Q_ = orthonormal_coeffs(b->rec_, m, allow_beyond_ceiling);
  }
  b->finish();
  return b;
}

void Basis::finish()
{
  phi_.assign(m_, {});
  for (int k = 0; k < m_; ++k) {
    phi_[k].resize(k + 1);
    for (int l = 0; l <= k; ++l)
      phi_[k][l] = Q_.q[k][l] * std::exp(-family_.log_a(l));
  }
  phi_nodes_.assign(rule_.size() * m_, 0);
  for (std::size_t i = 0; i < rule_.size(); ++i) {
    if (m_ == 0)
      break;
    Real* out = &phi_nodes_[i * m_];
    eval_recurrence(rec_, m_, rule_.nodes[i], out);
    for (int k = 0; k < m_; ++k)
      out[k] *= zt_[i];
  }
}

void Basis::eval(Real theta, Real* out) const
{
  if (!contains(static_cast<double>(theta))) {
    std::fill(out, out + m_, Real(0));
    return;
  }
  if (m_ == 0)
    return;
  eval_recurrence(rec_, m_, theta, out);
  const Real zt = std::exp(-family_.log_Z(theta));
  for (int k = 0; k < m_; ++k)
    out[k] *= zt;
}

double Basis::phi(int k, double theta) const
{
  if (k < 0 || k >= m_)
    throw ValidationError("basis index out of range");
  std::vector<Real> v(m_);
  eval(theta, v.data());
  return static_cast<double>(v[k]);
}

PhiMatrix phi_matrix(const PowerSeriesFamily& family, const MeasureSpec& measure, int m)
{
  auto b = Basis::build(family, measure, m);
  return { m, b->Phi() };
}

double Estimate::operator()(double theta) const
{
  const int m = basis->m();
  if (m == 0)
    return 0;
  std::vector<Real> v(m);
  basis->eval(theta, v.data());
  Real s = 0;
  for (int k = 0; k < m; ++k)
    s += coeffs[k] * v[k];
  return static_cast<double>(s);
}

double Estimate::norm_sq() const
{
  Real s = 0;
  for (double c : coeffs)
    s += Real(c) * c;
  return static_cast<double>(s);
}

double h_distance(const Estimate& e1, const Estimate& e2)
{
  if (e1.coeffs.size() != e2.coeffs.size())
    throw ValidationError("h_distance: estimates live on different bases");
  Real s = 0;
  for (std::size_t k = 0; k < e1.coeffs.size(); ++k) {
    Real d = Real(e1.coeffs[k]) - e2.coeffs[k];
    s += d * d;
  }
  return static_cast<double>(std::sqrt(s));
}

Estimate estimate_projection(const EmpiricalCounts& counts, BasisPtr basis)
{
  const int m = basis->m();
  auto freq = frequencies(counts, m);
  Estimate e{ std::vector<double>(m, 0.0), basis };
  const auto& phi = basis->Phi();
  for (int k = 0; k < m; ++k) {
    Real s = 0;
    for (int l = 0; l <= k; ++l)
      s += phi[k][l] * freq[l];
    e.coeffs[k] = static_cast<double>(s);
  }
  return e;
}

Estimate estimate_projection(const EmpiricalCounts& counts,
                             const PowerSeriesFamily& family,
                             const MeasureSpec& measure,
                             int m)
{
  return estimate_projection(counts, Basis::build(family, measure, m));
}

Estimate estimate_halfline(const EmpiricalCounts& counts, int m)
{
  return estimate_projection(counts, Basis::halfline(m));
}

double CheckEstimate::operator()(double theta) const
{
  const int m = static_cast<int>(d.size());
  if (m == 0 || theta < measure.a() || theta > measure.b())
    return 0;
  auto q = eval_recurrence(rec_nu, m, theta);
  Real s = 0;
  for (int k = 0; k < m; ++k)
    s += d[k] * q[k];
  return static_cast<double>(s * family.Z(theta));
}

CheckEstimate estimate_check(const EmpiricalCounts& counts,
                             const PowerSeriesFamily& family,
                             const MeasureSpec& measure,
                             int m)
{
  check_degree(m, false);
  if (measure.kind() != MeasureSpec::Kind::interval)
    throw ValidationError("estimate_check requires a Lebesgue-interval measure");
  if (measure.a() < 0 || !(measure.b() < family.radius()))
    throw ValidationError("parameter interval must lie in [0, R)");
  auto freq = frequencies(counts, m);
  CheckEstimate c;
  c.family = family;
  c.measure = measure;
  if (m == 0)
    return c;
  c.rec_nu = recurrence_for(measure, m);
  CoeffMatrix Q = orthonormal_coeffs(c.rec_nu, m);
  c.d.assign(m, 0);
  for (int k = 0; k < m; ++k)
    for (int l = 0; l <= k; ++l)
      c.d[k] += Q.q[k][l] * freq[l] * std::exp(-family.log_a(l));
  return c;
}

std::vector<double> project_check(const CheckEstimate& check, const Basis& basis)
{
  const int m = basis.m();
  const int mc = static_cast<int>(check.d.size());
  const Rule& rule = basis.rule();
  std::vector<Real> c(m, 0);
  std::vector<Real> qn(mc), qp(m);
  for (std::size_t i = 0; i < rule.size(); ++i) {
    const Real t = rule.nodes[i];
    if (mc == 0 || m == 0)
      break;
    eval_recurrence(check.rec_nu, mc, t, qn.data());
    eval_recurrence(basis.recurrence(), m, t, qp.data());
    Real p = 0;
    for (int k = 0; k < mc; ++k)
      p += check.d[k] * qn[k];
    // f̌ φ_j = (Z p)(q_j Z̃) = p q_j.
    for (int j = 0; j < m; ++j)
      c[j] += rule.weights[i] * p * qp[j];
  }
  return std::vector<double>(c.begin(), c.end());
}

struct GramFactor
{
  using Mat = Eigen::Matrix<QuadReal, Eigen::Dynamic, Eigen::Dynamic>;
  using Vec = Eigen::Matrix<QuadReal, Eigen::Dynamic, 1>;
  Mat R;
  Mat Rinv;
  Vec scale;
  Eigen::LLT<Mat> llt;
  std::vector<QuadReal> a;
};

GramMatrix gram_matrix(const Basis& basis)
{
  if (basis.half_line())
    throw ValidationError("gram_matrix requires a Lebesgue-interval basis");
  const int m = basis.m();
  GramMatrix g;
  g.m = m;
  auto f = std::make_shared<GramFactor>();
  if (m == 0) {
    g.factor = f;
    return g;
  }
  const Rule& rule = basis.rule();
  const auto& zt = basis.ztilde_nodes();
  std::vector<QuadReal> mom(2 * m - 1, QuadReal(0));
  for (std::size_t i = 0; i < rule.size(); ++i) {
    QuadReal x = rule.nodes[i];
    QuadReal z = zt[i];
    QuadReal v = QuadReal(rule.weights[i]) * z * z;
    for (int j = 0; j < 2 * m - 1; ++j) {
      mom[j] += v;
      v *= x;
    }
  }
  f->a.resize(m);
  for (int k = 0; k < m; ++k)
    f->a[k] = QuadReal(std::exp(basis.family().log_a(k)));
  f->R.resize(m, m);
  f->scale.resize(m);
  for (int k = 0; k < m; ++k)
    for (int l = 0; l < m; ++l)
      f->R(k, l) = f->a[k] * f->a[l] * mom[k + l];
  for (int k = 0; k < m; ++k)
    f->scale(k) = 1 / sqrt(f->R(k, k));
  GramFactor::Mat Rs = f->scale.asDiagonal() * f->R * f->scale.asDiagonal();
  f->llt.compute(Rs);
  g.R.assign(m, std::vector<double>(m));
  for (int k = 0; k < m; ++k)
    for (int l = 0; l < m; ++l)
      g.R[k][l] = static_cast<double>(f->R(k, l));
  if (f->llt.info() != Eigen::Success)
    throw ConditioningError("gram_matrix: factorization failed at m=" + std::to_string(m),
                            INFINITY);
  GramFactor::Mat Rsinv = f->llt.solve(GramFactor::Mat::Identity(m, m));
  auto norm1 = [m](const GramFactor::Mat& A) {
    QuadReal best = 0;
    for (int j = 0; j < m; ++j) {
      QuadReal s = 0;
      for (int i = 0; i < m; ++i)
        s += abs(A(i, j));
      best = std::max(best, s);
    }
    return best;
  };
  g.condition = static_cast<double>(norm1(Rs) * norm1(Rsinv));
  const double eps_quad = static_cast<double>(std::numeric_limits<QuadReal>::epsilon());
  const double limit = gram_condition_limit * (DBL_EPSILON / eps_quad);
  if (!(g.condition <= limit))
    throw ConditioningError("gram_matrix: estimated condition number " +
                              std::to_string(g.condition) + " at m=" + std::to_string(m),
                            g.condition);
  f->Rinv = f->scale.asDiagonal() * Rsinv * f->scale.asDiagonal();
  g.factor = f;
  return g;
}

GramMatrix gram_matrix(const PowerSeriesFamily& family, const MeasureSpec& measure, int m)
{
  return gram_matrix(*Basis::build(family, measure, m));
}

std::vector<double> gram_inverse_diagonal(const GramMatrix& gram)
{
  std::vector<double> d(gram.m);
  for (int k = 0; k < gram.m; ++k)
    d[k] = static_cast<double>(gram.factor->Rinv(k, k));
  return d;
}

std::vector<std::vector<double>> gram_inverse(const GramMatrix& gram)
{
  std::vector<std::vector<double>> inv(gram.m, std::vector<double>(gram.m));
  for (int k = 0; k < gram.m; ++k)
    for (int l = 0; l < gram.m; ++l)
      inv[k][l] = static_cast<double>(gram.factor->Rinv(k, l));
  return inv;
}

Estimate estimate_gram(const EmpiricalCounts& counts, BasisPtr basis)
{
  const int m = basis->m();
  auto freq = frequencies(counts, m);
  Estimate e{ std::vector<double>(m, 0.0), basis };
  if (m == 0)
    return e;
  GramMatrix g = gram_matrix(*basis);
  const GramFactor& f = *g.factor;
  GramFactor::Vec rhs(m);
  for (int k = 0; k < m; ++k)
    rhs(k) = f.scale(k) * QuadReal(freq[k]);
  GramFactor::Vec y = f.llt.solve(rhs);
  std::vector<QuadReal> xa(m);
  for (int k = 0; k < m; ++k)
    xa[k] = f.scale(k) * y(k) * f.a[k];

  // Σ x_l Π1_l at the nodes, then project onto the orthonormal basis.
  const Rule& rule = basis->rule();
  const auto& zt = basis->ztilde_nodes();
  const auto& pn = basis->basis_nodes();
  std::vector<Real> c(m, 0);
  for (std::size_t i = 0; i < rule.size(); ++i) {
    QuadReal t = rule.nodes[i];
    QuadReal p = 0;
    for (int l = m - 1; l >= 0; --l)
      p = p * t + xa[l];
    Real val = static_cast<Real>(p) * zt[i];
    for (int k = 0; k < m; ++k)
      c[k] += rule.weights[i] * val * pn[i * m + k];
  }
  for (int k = 0; k < m; ++k)
    e.coeffs[k] = static_cast<double>(c[k]);
  return e;
}

Estimate estimate_gram(const EmpiricalCounts& counts,
                       const PowerSeriesFamily& family,
                       const MeasureSpec& measure,
                       int m)
{
  return estimate_gram(counts, Basis::build(family, measure, m));
}

Projection project_density(const Density& f, const Basis& basis)
{
  auto r = residual_norms(f, basis);
  auto fv = sample_at_nodes(f, basis.rule());
  auto p = project_values(fv, basis);
  Projection out;
  out.coeffs.assign(p.c.begin(), p.c.end());
  out.norm_sq = static_cast<double>(p.norm_sq);
  out.residual_norm = r.back();
  return out;
}

std::vector<double> residual_norms(const Density& f, const Basis& basis)
{
  const Rule& rule = basis.rule();
  const int m = basis.m();
  const auto& pn = basis.basis_nodes();
  auto fv = sample_at_nodes(f, rule);
  auto p = project_values(fv, basis);
  // The residual is summed directly: ‖f‖² − Σc² cancels badly for near members.
  std::vector<Real> left(fv.begin(), fv.end());
  std::vector<double> out(m + 1);
  for (int k = 0; k <= m; ++k) {
    if (k > 0)
      for (std::size_t i = 0; i < rule.size(); ++i)
        left[i] -= p.c[k - 1] * pn[i * m + k - 1];
    Real s = 0;
    for (std::size_t i = 0; i < rule.size(); ++i)
      s += rule.weights[i] * left[i] * left[i];
    out[k] = static_cast<double>(std::sqrt(s));
  }
  return out;
}

std::vector<double> mixture_probs(const Density& f, const Basis& basis, int count)
{
  auto pi = mixture_probs_values(sample_at_nodes(f, basis.rule()), basis, count);
  return std::vector<double>(pi.begin(), pi.end());
}

MiseDecomposition exact_mise(const Density& f, const Basis& basis, double n)
{
  if (!(n > 0))
    throw ValidationError("exact_mise: n must be positive");
  const int m = basis.m();
  auto fv = sample_at_nodes(f, basis.rule());
  auto p = project_values(fv, basis);
  Real proj = 0;
  for (Real c : p.c)
    proj += c * c;
  const Real bias = std::max(Real(0), p.norm_sq - proj);
  // Only x < m carries weight: Φ_{k,x} = 0 for x > k.
  auto pi = mixture_probs_values(fv, basis, m);
  const auto& phi = basis.Phi();
  Real second = 0;
  for (int x = 0; x < m; ++x) {
    Real s = 0;
    for (int k = x; k < m; ++k)
      s += phi[k][x] * phi[k][x];
    second += pi[x] * s;
  }
  const Real var = (second - proj) / n;
  return { static_cast<double>(bias), static_cast<double>(var), static_cast<double>(bias + var) };
}

double variance_bound(const Density& f_inf, double K, const Basis& basis, double n)
{
  if (!(K >= 0))
    throw ValidationError("variance_bound: K must be nonnegative");
  if (!(n > 0))
    throw ValidationError("variance_bound: n must be positive");
  if (K == 0 || basis.m() == 0)
    return 0;
  GramMatrix g = gram_matrix(basis);
  auto pi = mixture_probs_values(sample_at_nodes(f_inf, basis.rule()), basis, basis.m());
  QuadReal s = 0;
  for (int k = 0; k < basis.m(); ++k)
    s += g.factor->Rinv(k, k) * QuadReal(pi[k]);
  return static_cast<double>(QuadReal(K) / QuadReal(n) * s);
}

Density clipped_density(const Estimate& estimate)
{
  const Rule& rule = estimate.basis->rule();
  Real mass = 0;
  for (std::size_t i = 0; i < rule.size(); ++i)
    mass += rule.weights[i] * std::max(0.0, estimate(static_cast<double>(rule.nodes[i])));
  if (!(mass > 0))
    throw NumericalError("clipped_density: estimate has no positive part");
  const double inv = static_cast<double>(1 / mass);
  return [estimate, inv](double t) { return std::max(0.0, estimate(t)) * inv; };
}

} // namespace demix
