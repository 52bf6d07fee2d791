#include "demix/simlab.hpp"
#include "demix/bandwidth.hpp"
#include "demix/errors.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <map>
#include <mutex>
#include <thread>

namespace demix {

int worker_count()
{
  if (const char* env = std::getenv("DEMIX_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1)
      return static_cast<int>(std::min<long>(v, 1024));
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t i)
{
  std::uint64_t z = i + 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return seed ^ (z ^ (z >> 31));
}

double uniform01(std::mt19937_64& rng)
{
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

Envelope::Envelope(Density f, double lo, double hi, int cells)
  : f_(std::move(f))
  , lo_(lo)
  , hi_(hi)
{
  if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi))
    throw ValidationError("Envelope: needs a finite interval");
  if (cells < 1)
    throw ValidationError("Envelope: needs at least one cell");
  int c = cells;
  build(c);
  while (acceptance_ < 0.01 && c < (1 << 20)) {
    c *= 2;
    build(c);
  }
}

void Envelope::build(int cells)
{
  constexpr int probes = 17;
  const double w = (hi_ - lo_) / cells;
  height_.assign(cells, 0);
  cdf_.assign(cells, 0);
  long double total = 0;
  for (int c = 0; c < cells; ++c) {
    double mx = 0;
    for (int j = 0; j < probes; ++j) {
      const double x = std::min(hi_, lo_ + (c + j / double(probes - 1)) * w);
      const double v = f_(x);
      if (!(v >= 0) || !std::isfinite(v))
        throw ValidationError("Envelope: density must be finite and nonnegative");
      mx = std::max(mx, v);
    }
    height_[c] = 1.01 * mx;
    total += height_[c] * w;
    cdf_[c] = static_cast<double>(total);
  }
  if (!(total > 0))
    throw ValidationError("Envelope: density vanishes on the sampling interval");
  // Acceptance measured on a fixed internal stream, so refinement never
  // depends on the caller's seed.
  std::mt19937_64 rng(0x5EEDULL);
  constexpr int trials = 4096;
  int accepted = 0;
  for (int t = 0; t < trials; ++t) {
    const double u = uniform01(rng) * cdf_.back();
    const std::size_t c =
      std::min<std::size_t>(std::upper_bound(cdf_.begin(), cdf_.end(), u) - cdf_.begin(), height_.size() - 1);
    const double x = std::min(hi_, lo_ + (c + uniform01(rng)) * w);
    if (uniform01(rng) * height_[c] < f_(x))
      ++accepted;
  }
  acceptance_ = double(accepted) / trials;
}

double Envelope::draw(std::mt19937_64& rng) const
{
  const double w = (hi_ - lo_) / height_.size();
  for (;;) {
    const double u = uniform01(rng) * cdf_.back();
    auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    const std::size_t c = std::min<std::size_t>(it - cdf_.begin(), height_.size() - 1);
    const double x = std::min(hi_, lo_ + (c + uniform01(rng)) * w);
    const double y = uniform01(rng) * height_[c];
    const double fx = f_(x);
    if (fx > height_[c])
      throw NumericalError("rejection envelope invalid: density exceeds it at " + std::to_string(x));
    if (y < fx)
      return x;
  }
}

namespace {

constexpr long double mass_cut = 1 - 1e-15L;
constexpr std::int64_t max_support = 10'000'000;

//! Inverse-CDF sampler for π_θ with cached ratios a_{k+1}/a_k.
class MixandSampler
{
public:
  explicit MixandSampler(const PowerSeriesFamily& family)
    : family_(family)
  {
  }

  std::int64_t draw(double theta, std::mt19937_64& rng)
  {
    const double u = uniform01(rng);
    if (theta == 0)
      return 0;
    const long double lt = std::log(static_cast<long double>(theta));
    long double p = std::exp(-family_.log_Z(theta));
    long double c = p;
    std::int64_t k = 0;
    while (u >= c && c < mass_cut && k < max_support) {
      if (p > 0)
        p *= theta * ratio(k);
      else
        p = std::exp(family_.log_a(static_cast<int>(k + 1)) + (k + 1) * lt - family_.log_Z(theta));
      ++k;
      c += p;
    }
    return k;
  }

private:
  long double ratio(std::int64_t k)
  {
    while (static_cast<std::int64_t>(ratios_.size()) <= k) {
      const int j = static_cast<int>(ratios_.size());
      ratios_.push_back(std::exp(family_.log_a(j + 1) - family_.log_a(j)));
    }
    return ratios_[k];
  }

  const PowerSeriesFamily& family_;
  std::vector<long double> ratios_;
};

ThetaPmf theta_pmf(const IntegerPmf& p)
{
  if (p.lo() < 1)
    throw ValidationError("uniform scenario: true pmf must live on {1, 2, ...}");
  ThetaPmf f(static_cast<std::size_t>(p.hi()), 0.0);
  for (std::int64_t t = p.lo(); t <= p.hi(); ++t)
    f[t - 1] = p(t);
  return f;
}

//! Sampling interval for θ: Θ itself, or the half-line cut where the tail mass
//! falls below 1e-13 of the total.
std::pair<double, double> theta_range(const SimConfig& c)
{
  if (c.measure.bounded())
    return { c.measure.a(), c.measure.b() };
  const Rule r = halfline_rule(1);
  std::vector<long double> tail(r.size() + 1, 0);
  for (std::size_t i = r.size(); i-- > 0;)
    tail[i] = tail[i + 1] + r.weights[i] * c.true_f(static_cast<double>(r.nodes[i]));
  std::size_t i = 0;
  while (i + 1 < r.size() && tail[i + 1] >= 1e-13L * tail[0])
    ++i;
  return { 0.0, static_cast<double>(r.nodes[i]) };
}

void check_config(const SimConfig& c)
{
  if (c.replicates < 1)
    throw ValidationError("replicates must be at least 1");
  if (c.n_grid.empty())
    throw ValidationError("n_grid must not be empty");
  for (std::size_t i = 0; i < c.n_grid.size(); ++i) {
    if (!(c.n_grid[i] >= 1) || c.n_grid[i] != std::floor(c.n_grid[i]))
      throw ValidationError("n_grid entries must be positive integers");
    if (i > 0 && !(c.n_grid[i] > c.n_grid[i - 1]))
      throw ValidationError("n_grid must be increasing");
  }
  switch (c.scenario) {
    case Scenario::power_series:
      if (!c.true_f)
        throw ValidationError("power-series scenario needs a true density");
      if (!c.measure.bounded() && !c.family.is_poisson())
        throw ValidationError("half-line scenario needs the Poisson family");
      break;
    case Scenario::deconv:
      if (c.true_pmf.probs.empty() || c.noise.probs.empty())
        throw ValidationError("deconv scenario needs true pmf and noise");
      if (c.kmin > c.kmax)
        throw ValidationError("deconv scenario: kmin must not exceed kmax");
      break;
    case Scenario::uniform:
      theta_pmf(c.true_pmf);
      break;
  }
}

double sum_sq_outside(const IntegerPmf& f, std::int64_t lo, std::int64_t hi)
{
  long double s = 0;
  for (std::int64_t k = f.lo(); k <= f.hi(); ++k)
    if (k < lo || k > hi)
      s += static_cast<long double>(f(k)) * f(k);
  return static_cast<double>(s);
}

} // namespace

std::int64_t draw_mixand(const PowerSeriesFamily& family, double theta, std::mt19937_64& rng)
{
  if (!(theta >= 0) || !(theta < family.radius()))
    throw ValidationError("draw_mixand: theta outside [0, R)");
  MixandSampler s(family);
  return s.draw(theta, rng);
}

std::int64_t draw_pmf(const IntegerPmf& p, std::mt19937_64& rng)
{
  if (p.probs.empty())
    throw ValidationError("draw_pmf: empty pmf");
  const double u = uniform01(rng);
  long double c = 0;
  for (std::size_t i = 0; i < p.probs.size(); ++i) {
    c += p.probs[i];
    if (u < c)
      return p.offset + static_cast<std::int64_t>(i);
  }
  // Rounding left u above the total; return the last atom with mass.
  for (std::size_t i = p.probs.size(); i-- > 0;)
    if (p.probs[i] > 0)
      return p.offset + static_cast<std::int64_t>(i);
  return p.hi();
}

namespace {

EmpiricalCounts sample_with(const SimConfig& config, double n, std::uint64_t seed, const Envelope* env)
{
  std::mt19937_64 rng(seed);
  EmpiricalCounts counts;
  const auto N = static_cast<std::uint64_t>(n);
  if (config.scenario == Scenario::uniform) {
    for (std::uint64_t i = 0; i < N; ++i) {
      const std::int64_t theta = draw_pmf(config.true_pmf, rng);
      counts.add(std::min<std::int64_t>(theta - 1, static_cast<std::int64_t>(uniform01(rng) * theta)));
    }
    return counts;
  }
  MixandSampler mix(config.family);
  for (std::uint64_t i = 0; i < N; ++i)
    counts.add(mix.draw(env->draw(rng), rng));
  return counts;
}

} // namespace

EmpiricalCounts sample_dataset(const SimConfig& config, double n, std::uint64_t seed)
{
  check_config(config);
  if (config.scenario == Scenario::deconv)
    throw ValidationError("sample_dataset: use sample_deconv_dataset for the deconv scenario");
  if (config.scenario == Scenario::uniform)
    return sample_with(config, n, seed, nullptr);
  auto [lo, hi] = theta_range(config);
  Envelope env(config.true_f, lo, hi);
  return sample_with(config, n, seed, &env);
}

IntegerCounts sample_deconv_dataset(const SimConfig& config, double n, std::uint64_t seed)
{
  check_config(config);
  if (config.scenario != Scenario::deconv)
    throw ValidationError("sample_deconv_dataset: deconv scenario only");
  std::mt19937_64 rng(seed);
  IntegerCounts counts;
  const auto N = static_cast<std::uint64_t>(n);
  for (std::uint64_t i = 0; i < N; ++i) {
    const std::int64_t t = draw_pmf(config.true_pmf, rng);
    ++counts[t + draw_pmf(config.noise, rng)];
  }
  return counts;
}

int resolve_m(const SimConfig& config, double n)
{
  const MRule& r = config.m_rule;
  switch (r.kind) {
    case MRule::Kind::fixed:
      if (r.m < 0)
        throw ValidationError("m must be nonnegative");
      return r.m;
    case MRule::Kind::poisson:
      return poisson_mn(n, r.tau.value_or(1.0));
    case MRule::Kind::finite_r:
      return finiteR_rule(config.family, config.measure.a(), config.measure.b(), n, r.tau).m_n;
    case MRule::Kind::halfline:
      return halfline_mn(n, r.lambda1, SmoothnessSeq::power(r.alpha));
    case MRule::Kind::uniform:
      return bandwidth_uniform(n, r.tau.value_or(1.0), r.beta);
  }
  return r.m;
}

double l2_dist(const Estimate& estimate, const Density& f)
{
  if (!estimate.basis)
    throw ValidationError("l2_dist: estimate has no basis");
  const Basis& b = *estimate.basis;
  const Rule& rule = b.rule();
  const int m = b.m();
  const auto& pn = b.basis_nodes();
  long double s = 0;
  for (std::size_t i = 0; i < rule.size(); ++i) {
    long double e = 0;
    for (int k = 0; k < m; ++k)
      e += estimate.coeffs[k] * pn[i * m + k];
    const long double d = e - f(static_cast<double>(rule.nodes[i]));
    s += rule.weights[i] * d * d;
  }
  return static_cast<double>(s);
}

double l2_dist(const std::vector<double>& estimate, std::int64_t first, const IntegerPmf& f)
{
  long double s = 0;
  const std::int64_t last = first + static_cast<std::int64_t>(estimate.size()) - 1;
  for (std::size_t i = 0; i < estimate.size(); ++i) {
    const long double d = estimate[i] - f(first + static_cast<std::int64_t>(i));
    s += d * d;
  }
  return static_cast<double>(s + sum_sq_outside(f, first, last));
}

namespace {

struct Cell
{
  double n;
  int m;
  BasisPtr basis;
  MiseDecomposition exact{ NAN, NAN, NAN };
};

struct Outcome
{
  double loss = 0;
  std::vector<double> coeffs;
};

//! Exact variance of the deconvolution estimate over [kmin, kmax]:
//! (1/n) Σ_k (Σ_y π(y) c(k−y)² − f(k)²) with c the coefficients of 1/p*.
double deconv_exact_variance(const SimConfig& c, double n)
{
  const auto pi = convolve(c.true_pmf, c.noise);
  const std::int64_t lo = c.kmin - pi.hi(), hi = c.kmax - pi.lo();
  auto coef = deconvolve({ { 0, 1.0 } }, c.noise, lo, hi);
  long double v = 0;
  for (std::int64_t k = c.kmin; k <= c.kmax; ++k) {
    long double e2 = 0;
    for (std::int64_t y = pi.lo(); y <= pi.hi(); ++y) {
      const long double ck = coef[k - y - lo];
      e2 += pi(y) * ck * ck;
    }
    v += e2 - static_cast<long double>(c.true_pmf(k)) * c.true_pmf(k);
  }
  return static_cast<double>(v / n);
}

} // namespace

MiseReport empirical_mise(const SimConfig& config)
{
  check_config(config);
  const int R = config.replicates;

  std::vector<Cell> cells;
  std::map<int, BasisPtr> bases;
  std::optional<Envelope> env;
  if (config.scenario == Scenario::power_series) {
    auto [lo, hi] = theta_range(config);
    env.emplace(config.true_f, lo, hi);
  }
  for (double n : config.n_grid) {
    Cell c{ n, 0, nullptr };
    switch (config.scenario) {
      case Scenario::power_series: {
        c.m = resolve_m(config, n);
        auto& b = bases[c.m];
        if (!b)
          b = config.measure.bounded() ? Basis::build(config.family, config.measure, c.m)
                                       : Basis::halfline(c.m);
        c.basis = b;
        c.exact = exact_mise(config.true_f, *b, n);
        break;
      }
      case Scenario::uniform:
        c.m = resolve_m(config, n);
        if (c.m < 1)
          throw ValidationError("uniform scenario needs m >= 1");
        c.exact = exact_mise_uniform(theta_pmf(config.true_pmf), c.m, n);
        break;
      case Scenario::deconv: {
        c.m = static_cast<int>(config.kmax - config.kmin + 1);
        const double bias = sum_sq_outside(config.true_pmf, config.kmin, config.kmax);
        const double var = deconv_exact_variance(config, n);
        c.exact = { bias, var, bias + var };
        break;
      }
    }
    cells.push_back(std::move(c));
  }

  const std::size_t tasks = cells.size() * static_cast<std::size_t>(R);
  std::vector<Outcome> out(tasks);
  auto run = [&](std::size_t t) {
    const Cell& c = cells[t / R];
    const std::uint64_t s = stream_seed(config.seed, t);
    Outcome& o = out[t];
    switch (config.scenario) {
      case Scenario::power_series: {
        auto counts = sample_with(config, c.n, s, &*env);
        Estimate e = c.m > 0 ? estimate_projection(counts, c.basis) : Estimate{ {}, c.basis };
        o.loss = l2_dist(e, config.true_f);
        o.coeffs = std::move(e.coeffs);
        break;
      }
      case Scenario::uniform: {
        auto counts = sample_with(config, c.n, s, nullptr);
        auto e = estimate_uniform(counts, c.m);
        o.loss = l2_dist(e, 1, config.true_pmf);
        break;
      }
      case Scenario::deconv: {
        auto counts = sample_deconv_dataset(config, c.n, s);
        auto e = estimate_deconv(counts, config.noise, config.kmin, config.kmax);
        o.loss = l2_dist(e, config.kmin, config.true_pmf);
        break;
      }
    }
  };

  const int workers = static_cast<int>(std::min<std::size_t>(worker_count(), tasks));
  std::atomic<std::size_t> next{ 0 };
  std::exception_ptr failure;
  std::mutex fail_mu;
  auto worker = [&] {
    for (;;) {
      const std::size_t t = next.fetch_add(1);
      if (t >= tasks)
        return;
      try {
        run(t);
      } catch (...) {
        std::lock_guard lock(fail_mu);
        if (!failure)
          failure = std::current_exception();
        next.store(tasks);
        return;
      }
    }
  };
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w)
      pool.emplace_back(worker);
    for (auto& th : pool)
      th.join();
  }
  if (failure)
    std::rethrow_exception(failure);

  MiseReport report;
  report.note = "logarithmic minimax rates are not resolvable at these sample sizes; "
                "only monotone decay and bound inequalities are checked";
  for (std::size_t ci = 0; ci < cells.size(); ++ci) {
    const Cell& c = cells[ci];
    long double sum = 0;
    for (int r = 0; r < R; ++r)
      sum += out[ci * R + r].loss;
    const long double mean = sum / R;
    long double ss = 0;
    for (int r = 0; r < R; ++r)
      ss += std::pow(out[ci * R + r].loss - mean, 2);
    MiseRow row{ c.n,
                 c.m,
                 static_cast<double>(mean),
                 R > 1 ? static_cast<double>(std::sqrt(ss / (R - 1) / R)) : NAN,
                 c.exact.bias_sq,
                 c.exact.variance,
                 {},
                 {} };
    if (config.scenario == Scenario::power_series && c.m > 0) {
      row.coef_mean.assign(c.m, 0);
      row.coef_se.assign(c.m, NAN);
      for (int k = 0; k < c.m; ++k) {
        long double s = 0, q = 0;
        for (int r = 0; r < R; ++r)
          s += out[ci * R + r].coeffs[k];
        const long double mk = s / R;
        for (int r = 0; r < R; ++r)
          q += std::pow(out[ci * R + r].coeffs[k] - mk, 2);
        row.coef_mean[k] = static_cast<double>(mk);
        if (R > 1)
          row.coef_se[k] = static_cast<double>(std::sqrt(q / (R - 1) / R));
      }
    }
    report.rows.push_back(std::move(row));
  }
  return report;
}

RateTable rate_table(const MiseReport& report, const std::function<double(double)>& rate)
{
  if (report.rows.empty())
    throw ValidationError("rate_table: empty report");
  RateTable t;
  int dec = 0;
  for (std::size_t i = 0; i < report.rows.size(); ++i) {
    const auto& r = report.rows[i];
    const double q = rate(r.n);
    if (!(q > 0))
      throw ValidationError("rate_table: rate must be positive");
    t.rows.push_back({ r.n, r.empirical_mise, r.empirical_mise / q, r.standard_error / q });
    if (i > 0 && r.empirical_mise < report.rows[i - 1].empirical_mise)
      ++dec;
  }
  t.decrease_fraction = report.rows.size() > 1 ? double(dec) / double(report.rows.size() - 1) : 1.0;
  return t;
}

bool decreasing_within_se(const MiseReport& report)
{
  const auto& rows = report.rows;
  if (rows.size() < 2)
    return true;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double se0 = std::isnan(rows[i - 1].standard_error) ? 0 : rows[i - 1].standard_error;
    const double se1 = std::isnan(rows[i].standard_error) ? 0 : rows[i].standard_error;
    if (!(rows[i].empirical_mise < rows[i - 1].empirical_mise + 3 * std::hypot(se0, se1)))
      return false;
  }
  return rows.back().empirical_mise < rows.front().empirical_mise;
}

namespace {

std::string num(double v)
{
  if (std::isnan(v))
    return "NA";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

} // namespace

std::string report_csv(const MiseReport& report)
{
  std::string s;
  if (!report.note.empty())
    s += "# " + report.note + "\n";
  s += "n,m,empirical_mise,standard_error,exact_bias_sq,exact_variance,exact_total\n";
  for (const auto& r : report.rows) {
    s += num(r.n) + "," + std::to_string(r.m) + "," + num(r.empirical_mise) + "," + num(r.standard_error) + "," +
         num(r.exact_bias_sq) + "," + num(r.exact_variance) + "," + num(r.exact_bias_sq + r.exact_variance) + "\n";
  }
  return s;
}

} // namespace demix
