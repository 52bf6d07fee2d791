#include "demix/errors.hpp"
#include "demix/uniformmix.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace demix;

namespace {

ThetaPmf random_theta_pmf(std::mt19937_64& rng, int len)
{
  std::uniform_real_distribution<double> U(0, 1);
  ThetaPmf f(len);
  double s = 0;
  for (double& v : f) {
    v = U(rng);
    s += v;
  }
  for (double& v : f)
    v /= s;
  return f;
}

} // namespace

TEST_CASE("uniform mixture estimator")
{
  auto c = EmpiricalCounts::from_observations({ 0, 0, 1, 2 });
  auto f = estimate_uniform(c, 3);
  CHECK(f[0] == doctest::Approx(0.25));
  CHECK(f[1] == 0.0);
  CHECK(f[2] == doctest::Approx(0.75));
  CHECK(f[0] + f[1] + f[2] == doctest::Approx(1.0));

  auto zeros = estimate_uniform(EmpiricalCounts::from_observations({ 0, 0, 0 }), 4);
  CHECK(zeros == std::vector<double>{ 1, 0, 0, 0 });
  auto neg = estimate_uniform(EmpiricalCounts::from_observations({ 1, 1, 3 }), 1);
  CHECK(neg[0] == doctest::Approx(-2.0 / 3));
  CHECK_THROWS_AS(estimate_uniform(EmpiricalCounts{}, 2), ValidationError);
  CHECK_THROWS_AS(estimate_uniform(c, 0), ValidationError);
}

TEST_CASE("telescoping mass identity")
{
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> X(0, 12);
  for (int t = 0; t < 50; ++t) {
    EmpiricalCounts c;
    for (int i = 0; i < 30; ++i)
      c.add(X(rng));
    for (int m : { 1, 4, 9, 15 }) {
      auto f = estimate_uniform(c, m);
      double s = 0, below = 0;
      for (double v : f)
        s += v;
      for (int k = 0; k < m; ++k)
        below += c.frequency(k);
      CHECK(s == doctest::Approx(below - m * c.frequency(m)).epsilon(1e-13));
    }
  }
}

TEST_CASE("exact unbiasedness identity")
{
  std::mt19937_64 rng(7);
  for (int t = 0; t < 20; ++t) {
    auto f = random_theta_pmf(rng, 8);
    for (int k = 1; k <= 8; ++k) {
      const double lhs = k * (uniform_mixture_pmf(f, k - 1) - uniform_mixture_pmf(f, k));
      CHECK(lhs == doctest::Approx(f[k - 1]).epsilon(1e-13));
    }
    double mass = 0;
    for (int k = 0; k < 8; ++k)
      mass += uniform_mixture_pmf(f, k);
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-14));
    // Supported in {1..m}: the exact MISE is pure variance and below the bound.
    for (double n : { 10.0, 500.0 }) {
      const double e = exact_mise_uniform(f, 8, n).total;
      CHECK(exact_mise_uniform(f, 8, n).bias_sq < 1e-28);
      CHECK(e <= mise_bound_uniform(f, 8, n));
    }
  }
}

TEST_CASE("MISE bound")
{
  CHECK(mise_bound_uniform(ThetaPmf{ 1.0 }, 1, 50) == doctest::Approx(1.0 / 50));
  ThetaPmf f{ 0.5, 0, 0.5 };
  CHECK(mise_bound_uniform(f, 3, 1e12) < 1e-10);
  // Unbounded support through the callable overload matches the vector form.
  auto geo = [](std::int64_t t) { return std::pow(0.5, double(t)); };
  ThetaPmf g;
  for (int t = 1; t <= 60; ++t)
    g.push_back(geo(t));
  CHECK(mise_bound_uniform(geo, 5, 100) == doctest::Approx(mise_bound_uniform(g, 5, 100)).epsilon(1e-10));

  // Simulated MISE ≤ bound within 3 SE.
  std::mt19937_64 rng(42);
  const int R = 400, n = 500, m = 3;
  double sum = 0, sq = 0;
  for (int r = 0; r < R; ++r) {
    EmpiricalCounts c;
    for (int i = 0; i < n; ++i) {
      const int theta = std::bernoulli_distribution(0.5)(rng) ? 1 : 3;
      c.add(std::uniform_int_distribution<int>(0, theta - 1)(rng));
    }
    auto est = estimate_uniform(c, m);
    double loss = 0;
    for (int k = 1; k <= m; ++k)
      loss += std::pow(est[k - 1] - f[k - 1], 2);
    sum += loss;
    sq += loss * loss;
  }
  const double mean = sum / R, se = std::sqrt((sq / R - mean * mean) / (R - 1));
  CHECK(mean <= mise_bound_uniform(f, m, n) + 3 * se);
  CHECK(std::fabs(mean - exact_mise_uniform(f, m, n).total) <= 3 * se);
}

TEST_CASE("lower-bound fixture")
{
  auto fx = fixture_g(2, 1.0, 0.3);
  // (1, −3, 2)/√14 scaled to C u/2 = 0.15.
  CHECK(fx.g[0] == doctest::Approx(0.15 / std::sqrt(14.0)).epsilon(1e-14));
  CHECK(fx.g[0] / fx.g[1] == doctest::Approx(-1.0 / 3));
  CHECK(fx.g[0] / fx.g[2] == doctest::Approx(0.5));
  for (int m : { 2, 3, 10, 100 }) {
    for (double Cu : { 0.1, 0.5, 1.0 }) {
      auto f = fixture_g(m, Cu, 1.0);
      double sg = 0, sgt = 0, n2 = 0;
      for (int i = 0; i < 3; ++i) {
        sg += f.g[i];
        sgt += f.g[i] / (m + i);
        n2 += f.g[i] * f.g[i];
      }
      CHECK(std::fabs(sg) < 1e-12);
      CHECK(std::fabs(sgt) < 1e-12);
      CHECK(std::fabs(std::sqrt(n2) - Cu / 2) < 1e-12);
      CHECK(f.g[0] > 0);
      for (const auto& h : { f.plus(), f.minus() }) {
        double mass = 0;
        for (double v : h) {
          CHECK(v >= -1e-15);
          mass += v;
        }
        CHECK(std::fabs(mass - 1) < 1e-12);
      }
    }
  }
  CHECK_THROWS_AS(fixture_g(2, 10.0, 1.0), ValidationError);
  CHECK_THROWS_AS(fixture_g(1, 1.0, 1.0), ValidationError);
}

TEST_CASE("uniform bandwidth and bounds")
{
  CHECK(bandwidth_uniform(1e4, 1, 0.4) == 40);
  CHECK(bandwidth_uniform(1, 2.5, 0.3) == 3);
  CHECK_THROWS_AS(bandwidth_uniform(100, 1, 0.5), ValidationError);
  CHECK_THROWS_AS(bandwidth_uniform(100, 0, 0.3), ValidationError);
  for (int m = 2; m <= 40; ++m) {
    const double u = std::log(2.0 + m), un = std::log(3.0 + m);
    const double C = 1.0;
    // u_m = log(1+m)^{-1}
    const double lo = uniform_lower_bound(C, 1 / un, m, 1e6);
    const double hi = uniform_upper_bound(C, 1 / u, m, 1e6);
    CHECK(lo <= hi);
  }
  CHECK(uniform_lower_bound(1, 0.5, 4, 0) == doctest::Approx(0.0625));
  CHECK(uniform_upper_bound(1, 0.5, 4, 32) == doctest::Approx(0.25 + 1));
}
