#include "demix/deconv.hpp"
#include "demix/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace demix {

namespace {

constexpr double pi = std::numbers::pi;

std::map<std::int64_t, double> as_map(const IntegerPmf& p)
{
  std::map<std::int64_t, double> m;
  for (std::size_t i = 0; i < p.probs.size(); ++i)
    if (p.probs[i] != 0)
      m[p.offset + static_cast<std::int64_t>(i)] = p.probs[i];
  return m;
}

void check_pmf(const IntegerPmf& p, const char* what)
{
  if (p.probs.empty())
    throw ValidationError(std::string(what) + ": empty pmf");
  for (double v : p.probs)
    if (!(v >= 0) || !std::isfinite(v))
      throw ValidationError(std::string(what) + ": pmf entries must be nonnegative");
}

} // namespace

FourierGrid FourierGrid::make(int G)
{
  if (G < 2 || G % 2 != 0)
    throw ValidationError("FourierGrid: G must be even and at least 2");
  return FourierGrid{ G };
}

double FourierGrid::node(int j) const
{
  return -pi + 2 * pi * j / G;
}

std::complex<double> fourier_series(const std::map<std::int64_t, double>& coeffs, double lambda)
{
  long double re = 0, im = 0;
  for (auto [k, c] : coeffs) {
    // Reduce kλ mod 2π in long double before taking cos/sin.
    const long double ang = std::remainder(static_cast<long double>(k) * lambda, 2 * std::numbers::pi_v<long double>);
    re += c * std::cos(ang);
    im -= c * std::sin(ang);
  }
  return { static_cast<double>(re), static_cast<double>(im) };
}

std::complex<double> fourier_series(const IntegerPmf& p, double lambda)
{
  return fourier_series(as_map(p), lambda);
}

KpResult Kp(const NoisePmf& p, const FourierGrid& grid)
{
  check_pmf(p, "Kp");
  FourierGrid::make(grid.G);
  const auto coeffs = as_map(p);
  long double s = 0;
  double lo = INFINITY;
  for (int j = 1; j <= grid.G; ++j) {
    const double a2 = std::norm(fourier_series(coeffs, grid.node(j)));
    lo = std::min(lo, a2);
    s += 1.0L / a2;
  }
  if (lo < 1e-12)
    return { INFINITY, true };
  return { static_cast<double>(s * 2 * pi / grid.G), false };
}

std::vector<double> deconvolve(const std::map<std::int64_t, double>& freqs,
                               const NoisePmf& p,
                               std::int64_t kmin,
                               std::int64_t kmax,
                               const FourierGrid& grid)
{
  check_pmf(p, "deconvolve");
  if (kmin > kmax)
    throw ValidationError("deconvolve: kmin must not exceed kmax");
  if (freqs.empty())
    throw ValidationError("deconvolve: no data");
  FourierGrid::make(grid.G);

  const std::int64_t lo = std::min({ freqs.begin()->first, p.lo(), kmin });
  const std::int64_t hi = std::max({ freqs.rbegin()->first, p.hi(), kmax });
  std::int64_t need = 2 * (hi - lo + 1) + 2;
  need += need % 2;
  if (need > (std::int64_t(1) << 26))
    throw ValidationError("deconvolve: support too wide");
  const FourierGrid g{ static_cast<int>(std::max<std::int64_t>(grid.G, need)) };

  // Powers e^{−ikλ_j}, k = lo..hi, by rotation from one exactly reduced start.
  const std::size_t width = static_cast<std::size_t>(hi - lo + 1);
  std::vector<std::complex<double>> e(width);
  std::vector<long double> acc(static_cast<std::size_t>(kmax - kmin + 1), 0);
  for (int j = 1; j <= g.G; ++j) {
    const double lam = g.node(j);
    const std::complex<double> z = std::polar(1.0, -lam);
    const long double start =
      std::remainder(static_cast<long double>(lo) * lam, 2 * std::numbers::pi_v<long double>);
    std::complex<double> zk = std::polar(1.0, static_cast<double>(-start));
    for (std::size_t i = 0; i < width; ++i) {
      e[i] = zk;
      zk *= z;
    }
    std::complex<double> data = 0, ps = 0;
    for (auto [k, c] : freqs)
      data += c * e[k - lo];
    for (std::size_t i = 0; i < p.probs.size(); ++i)
      ps += p.probs[i] * e[p.offset + static_cast<std::int64_t>(i) - lo];
    if (std::norm(ps) < 1e-12)
      throw ValidationError("deconvolve: p* vanishes on the grid (K_p divergent)");
    const std::complex<double> r = data / ps;
    for (std::int64_t k = kmin; k <= kmax; ++k)
      acc[k - kmin] += (r * std::conj(e[k - lo])).real();
  }
  std::vector<double> out(acc.size());
  for (std::size_t i = 0; i < acc.size(); ++i)
    out[i] = static_cast<double>(acc[i] / g.G);
  return out;
}

std::vector<double> estimate_deconv(const IntegerCounts& counts,
                                    const NoisePmf& p,
                                    std::int64_t kmin,
                                    std::int64_t kmax,
                                    const FourierGrid& grid)
{
  std::uint64_t n = 0;
  for (auto [k, c] : counts)
    n += c;
  if (n == 0)
    throw ValidationError("estimate_deconv: empty counts");
  std::map<std::int64_t, double> freqs;
  for (auto [k, c] : counts)
    if (c > 0)
      freqs[k] = static_cast<double>(c) / static_cast<double>(n);
  return deconvolve(freqs, p, kmin, kmax, grid);
}

IntegerPmf convolve(const IntegerPmf& a, const IntegerPmf& b)
{
  if (a.probs.empty() || b.probs.empty())
    return {};
  IntegerPmf c;
  c.offset = a.offset + b.offset;
  c.probs.assign(a.probs.size() + b.probs.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.probs.size(); ++i)
    for (std::size_t j = 0; j < b.probs.size(); ++j)
      c.probs[i + j] += a.probs[i] * b.probs[j];
  return c;
}

Thm4Constants thm4_constants(const IntegerPmf& f0, const IntegerPmf& f1, const NoisePmf& p)
{
  check_pmf(f0, "thm4_constants");
  check_pmf(f1, "thm4_constants");
  check_pmf(p, "thm4_constants");
  const auto p0 = convolve(f0, p), p1 = convolve(f1, p);
  long double c0 = 0, c1 = 0;
  for (std::int64_t k = std::min(f0.lo(), f1.lo()); k <= std::max(f0.hi(), f1.hi()); ++k)
    c0 += std::pow(static_cast<long double>(f1(k)) - f0(k), 2);
  for (std::int64_t k = std::min(p0.lo(), p1.lo()); k <= std::max(p0.hi(), p1.hi()); ++k)
    c1 += std::fabs(static_cast<long double>(p1(k)) - p0(k));
  Thm4Constants out{ static_cast<double>(c0), static_cast<double>(c1), NAN, c1 == 0 };
  if (!out.non_identifiable)
    out.asymptotic_lower = out.c0 / (2 * out.c1);
  return out;
}

double fisher_info(double w, const IntegerPmf& f0, const IntegerPmf& f1, const NoisePmf& p)
{
  if (!(w > 0 && w < 1))
    throw ValidationError("fisher_info: w must lie in (0, 1)");
  check_pmf(f0, "fisher_info");
  check_pmf(f1, "fisher_info");
  check_pmf(p, "fisher_info");
  const auto p0 = convolve(f0, p), p1 = convolve(f1, p);
  long double s = 0;
  for (std::int64_t k = std::min(p0.lo(), p1.lo()); k <= std::max(p0.hi(), p1.hi()); ++k) {
    const long double d = static_cast<long double>(p1(k)) - p0(k);
    const long double den = (static_cast<long double>(p0(k)) + p1(k)) / 2 + (w - 0.5L) * d;
    if (d == 0)
      continue;
    s += d * d / den;
  }
  return static_cast<double>(s);
}

} // namespace demix
