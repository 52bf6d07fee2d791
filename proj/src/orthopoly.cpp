#include "demix/orthopoly.hpp"
#include "demix/errors.hpp"

#include <cmath>
#include <sstream>

namespace demix {

MeasureSpec MeasureSpec::interval(double a, double b)
{
  if (!std::isfinite(a) || !std::isfinite(b) || !(a < b))
    throw ValidationError("interval measure requires finite a < b");
  MeasureSpec m;
  m.kind_ = Kind::interval;
  m.a_ = a;
  m.b_ = b;
  return m;
}

MeasureSpec MeasureSpec::exp_weight(int rate)
{
  if (rate != 1 && rate != 2)
    throw ValidationError("exp-weight measure requires rate 1 or 2");
  MeasureSpec m;
  m.kind_ = Kind::exp_weight;
  m.a_ = 0;
  m.b_ = INFINITY;
  m.rate_ = rate;
  return m;
}

std::string MeasureSpec::describe() const
{
  std::ostringstream os;
  if (kind_ == Kind::interval)
    os << "lebesgue[" << a_ << "," << b_ << "]";
  else
    os << "exp-weight(rate=" << rate_ << ")";
  return os.str();
}

RecurrenceCoeffs recurrence_for(const MeasureSpec& measure, int count)
{
  if (count < 1)
    throw ValidationError("recurrence_for: count must be positive");
  RecurrenceCoeffs rc;
  rc.alpha.resize(count);
  rc.beta.resize(count);
  if (measure.kind() == MeasureSpec::Kind::interval) {
    // Legendre scaled to [a, b]: α_k = μ, β_k = δ²/(4 − 1/k²).
    const Real a = measure.a(), b = measure.b();
    const Real mu = (a + b) / 2, delta = (b - a) / 2;
    for (int k = 0; k < count; ++k) {
      rc.alpha[k] = mu;
      rc.beta[k] =
        k == 0 ? 2 * delta : delta * delta / (4 - Real(1) / (Real(k) * k));
    }
  } else if (measure.rate() == 1) {
    for (int k = 0; k < count; ++k) {
      rc.alpha[k] = 2 * Real(k) + 1;
      rc.beta[k] = k == 0 ? Real(1) : Real(k) * k;
    }
  } else if (measure.rate() == 2) {
    for (int k = 0; k < count; ++k) {
      rc.alpha[k] = Real(k) + Real(0.5);
      rc.beta[k] = k == 0 ? Real(0.5) : Real(k) * k / 4;
    }
  } else {
    throw ValidationError("recurrence_for: unsupported measure");
  }
  return rc;
}

RecurrenceCoeffs stieltjes(const Rule& measure, int count)
{
  const std::size_t n = measure.size();
  if (count < 1 || static_cast<std::size_t>(count) >= n)
    throw ValidationError("stieltjes: count must lie in [1, nodes)");
  RecurrenceCoeffs rc;
  rc.alpha.resize(count);
  rc.beta.resize(count);
  const auto& x = measure.nodes;
  const auto& w = measure.weights;

  Real mass = 0;
  for (std::size_t i = 0; i < n; ++i)
    mass += w[i];
  if (!(mass > 0))
    throw NumericalError("stieltjes: measure has no mass");
  rc.beta[0] = mass;

  std::vector<Real> prev(n, 0), cur(n, 1 / std::sqrt(mass)), next(n);
  for (int k = 0; k < count; ++k) {
    Real a = 0;
    for (std::size_t i = 0; i < n; ++i)
      a += w[i] * x[i] * cur[i] * cur[i];
    rc.alpha[k] = a;
    if (k + 1 == count)
      break;
    const Real sb = std::sqrt(rc.beta[k]);
    Real b = 0;
    for (std::size_t i = 0; i < n; ++i) {
      next[i] = (x[i] - a) * cur[i] - (k > 0 ? sb * prev[i] : 0);
      b += w[i] * next[i] * next[i];
    }
    if (!(b > 0) || !std::isfinite(b))
      throw NumericalError("stieltjes: breakdown at k=" + std::to_string(k + 1));
    rc.beta[k + 1] = b;
    const Real s = 1 / std::sqrt(b);
    for (std::size_t i = 0; i < n; ++i)
      next[i] *= s;
    std::swap(prev, cur);
    std::swap(cur, next);
  }
  return rc;
}

CoeffMatrix orthonormal_coeffs(const RecurrenceCoeffs& coeffs,
                               int m,
                               bool allow_beyond_ceiling)
{
  if (m < 1)
    throw ValidationError("orthonormal_coeffs: m must be positive");
  if (m > default_max_degree && !allow_beyond_ceiling)
    throw PrecisionError("orthonormal_coeffs: m=" + std::to_string(m) +
                         " exceeds the precision ceiling " +
                         std::to_string(default_max_degree));
  if (coeffs.size() < m)
    throw ValidationError("orthonormal_coeffs: too few recurrence coefficients");

  CoeffMatrix Q;
  Q.m = m;
  Q.q.resize(m);
  Q.q[0] = { 1 / std::sqrt(coeffs.beta[0]) };
  for (int k = 0; k + 1 < m; ++k) {
    const Real a = coeffs.alpha[k];
    const Real sb = std::sqrt(coeffs.beta[k]);
    const Real sn = std::sqrt(coeffs.beta[k + 1]);
    std::vector<Real> row(k + 2, 0);
    for (int l = 0; l <= k; ++l) {
      row[l + 1] += Q.q[k][l];
      row[l] -= a * Q.q[k][l];
    }
    if (k > 0)
      for (int l = 0; l < k; ++l)
        row[l] -= sb * Q.q[k - 1][l];
    for (auto& v : row) {
      v /= sn;
      if (!std::isfinite(v))
        throw NumericalError("orthonormal_coeffs: non-finite coefficient at k=" +
                             std::to_string(k + 1));
    }
    Q.q[k + 1] = std::move(row);
  }
  return Q;
}

double eval_orthopoly(const CoeffMatrix& Q, int k, double t)
{
  if (k < 0 || k >= Q.m)
    throw ValidationError("eval_orthopoly: index out of range");
  Real s = 0;
  for (int l = k; l >= 0; --l)
    s = s * t + Q.q[k][l];
  return static_cast<double>(s);
}

void eval_recurrence(const RecurrenceCoeffs& coeffs, int m, Real t, Real* out)
{
  if (m <= 0)
    return;
  if (coeffs.size() < m)
    throw ValidationError("eval_recurrence: too few recurrence coefficients");
  out[0] = 1 / std::sqrt(coeffs.beta[0]);
  Real prev = 0;
  for (int k = 0; k + 1 < m; ++k) {
    Real nx = ((t - coeffs.alpha[k]) * out[k] -
               (k > 0 ? std::sqrt(coeffs.beta[k]) * prev : Real(0))) /
              std::sqrt(coeffs.beta[k + 1]);
    prev = out[k];
    out[k + 1] = nx;
  }
}

std::vector<Real> eval_recurrence(const RecurrenceCoeffs& coeffs, int m, Real t)
{
  std::vector<Real> v(std::max(m, 0));
  eval_recurrence(coeffs, m, t, v.data());
  return v;
}

Rule measure_rule(const MeasureSpec& measure)
{
  if (measure.kind() == MeasureSpec::Kind::interval)
    return gauss_legendre(256, measure.a(), measure.b());
  Rule r = halfline_rule(measure.rate());
  for (std::size_t i = 0; i < r.size(); ++i)
    r.weights[i] *= std::exp(-measure.rate() * r.nodes[i]);
  return r;
}

std::vector<OracleReal> exact_moments(const MeasureSpec& measure, int count)
{
  std::vector<OracleReal> mu(count);
  if (measure.kind() == MeasureSpec::Kind::interval) {
    OracleReal a = measure.a(), b = measure.b();
    OracleReal pa = a, pb = b;
    for (int j = 0; j < count; ++j) {
      mu[j] = (pb - pa) / (j + 1);
      pa *= a;
      pb *= b;
    }
  } else {
    // ∫ t^j e^{-rt} dt = j!/r^{j+1}
    OracleReal r = measure.rate(), v = 1 / r;
    for (int j = 0; j < count; ++j) {
      mu[j] = v;
      v *= OracleReal(j + 1) / r;
    }
  }
  return mu;
}

CoeffMatrix gram_schmidt_oracle(const std::vector<OracleReal>& moments, int m)
{
  if (m < 1)
    throw ValidationError("gram_schmidt_oracle: m must be positive");
  if (static_cast<int>(moments.size()) < 2 * m - 1)
    throw ValidationError("gram_schmidt_oracle: need 2m-1 moments");
  using R = OracleReal;
  std::vector<std::vector<R>> L(m, std::vector<R>(m, R(0)));
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j <= i; ++j) {
      R s = moments[i + j];
      for (int k = 0; k < j; ++k)
        s -= L[i][k] * L[j][k];
      if (i == j) {
        if (!(s > 0))
          throw NumericalError("gram_schmidt_oracle: moment matrix not positive "
                               "definite at order " + std::to_string(i));
        L[i][i] = sqrt(s);
      } else {
        L[i][j] = s / L[j][j];
      }
    }
  }
  // Rows of L^{-1} by forward substitution.
  CoeffMatrix Q;
  Q.m = m;
  Q.q.resize(m);
  std::vector<std::vector<R>> inv(m, std::vector<R>(m, R(0)));
  for (int i = 0; i < m; ++i) {
    inv[i][i] = 1 / L[i][i];
    for (int j = 0; j < i; ++j) {
      R s = 0;
      for (int k = j; k < i; ++k)
        s += L[i][k] * inv[k][j];
      inv[i][j] = -s / L[i][i];
    }
    Q.q[i].resize(i + 1);
    for (int j = 0; j <= i; ++j)
      Q.q[i][j] = static_cast<Real>(inv[i][j]);
  }
  return Q;
}

CoeffMatrix gram_schmidt_oracle(const std::vector<double>& moments, int m)
{
  std::vector<OracleReal> mu(moments.begin(), moments.end());
  return gram_schmidt_oracle(mu, m);
}

std::vector<double> coeff_growth(const CoeffMatrix& Q, const std::vector<double>& weights)
{
  if (!weights.empty()) {
    if (static_cast<int>(weights.size()) < Q.m)
      throw ValidationError("coeff_growth: weights shorter than m");
    for (double a : weights)
      if (!(a > 0))
        throw ValidationError("coeff_growth: weights must be positive");
  }
  std::vector<double> s(Q.m);
  for (int k = 0; k < Q.m; ++k) {
    Real acc = 0;
    for (int l = 0; l <= k; ++l) {
      Real v = Q.q[k][l] / (weights.empty() ? Real(1) : Real(weights[l]));
      acc += v * v;
    }
    s[k] = static_cast<double>(acc);
  }
  return s;
}

} // namespace demix
