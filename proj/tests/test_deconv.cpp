#include "demix/deconv.hpp"
#include "demix/errors.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace demix;

namespace {

const double PI = std::numbers::pi;

// Power-series coefficients of 1/p(z) by long division; Σ c_k² = K_p/(2π).
double kp_by_division(const std::vector<double>& p, int terms = 4000)
{
  std::vector<long double> c(terms, 0);
  long double ss = 0;
  for (int k = 0; k < terms; ++k) {
    long double v = k == 0 ? 1 : 0;
    for (std::size_t j = 1; j < p.size() && j <= static_cast<std::size_t>(k); ++j)
      v -= p[j] * c[k - j];
    c[k] = v / p[0];
    ss += c[k] * c[k];
  }
  return static_cast<double>(2 * PI * ss);
}

IntegerPmf random_pmf(std::mt19937_64& rng, int len, std::int64_t offset)
{
  std::uniform_real_distribution<double> U(0, 1);
  IntegerPmf p;
  p.offset = offset;
  double s = 0;
  for (int i = 0; i < len; ++i) {
    p.probs.push_back(U(rng));
    s += p.probs.back();
  }
  for (double& v : p.probs)
    v /= s;
  return p;
}

} // namespace

TEST_CASE("Fourier series of a pmf")
{
  auto delta = make_noise_pmf(0, { 1.0 });
  for (double l : { -3.0, 0.1, 2.0 })
    CHECK(std::abs(fourier_series(delta, l) - std::complex<double>(1, 0)) < 1e-15);
  auto p = make_noise_pmf(0, { 0.75, 0.25 });
  CHECK(std::abs(fourier_series(p, PI) - std::complex<double>(0.5, 0)) < 1e-15);
  std::mt19937_64 rng(3);
  for (int t = 0; t < 10; ++t)
    CHECK(std::abs(fourier_series(random_pmf(rng, 7, -3), 0.0) - 1.0) < 1e-14);
  CHECK_THROWS_AS(FourierGrid::make(7), ValidationError);
  CHECK_THROWS_AS(FourierGrid::make(0), ValidationError);
  CHECK(FourierGrid::make(4).node(4) == doctest::Approx(PI));
}

TEST_CASE("K_p")
{
  auto k = Kp(make_noise_pmf(0, { 0.75, 0.25 }));
  CHECK_FALSE(k.divergent);
  const double closed = 2 * PI / std::sqrt(0.625 * 0.625 - 0.375 * 0.375);
  CHECK(closed == doctest::Approx(4 * PI).epsilon(1e-15));
  CHECK(std::fabs(k.value - closed) < 1e-9);
  CHECK(Kp(make_noise_pmf(5, { 1.0 })).value == doctest::Approx(2 * PI).epsilon(1e-14));
  CHECK(Kp(make_noise_pmf(0, { 0.5, 0.5 })).divergent);

  // Three-point noise against the long-division oracle.
  for (auto p : { std::vector<double>{ 0.6, 0.3, 0.1 }, std::vector<double>{ 0.5, 0.2, 0.2, 0.1 } })
    CHECK(Kp(make_noise_pmf(-1, p)).value == doctest::Approx(kp_by_division(p)).epsilon(1e-10));
}

TEST_CASE("identity and shifted deconvolution")
{
  auto delta = make_noise_pmf(0, { 1.0 });
  auto f = estimate_deconv({ { 0, 3 }, { 2, 1 } }, delta, 0, 2);
  CHECK(std::fabs(f[0] - 0.75) < 1e-12);
  CHECK(std::fabs(f[1]) < 1e-12);
  CHECK(std::fabs(f[2] - 0.25) < 1e-12);

  IntegerCounts c{ { -4, 2 }, { 1, 5 }, { 3, 3 } };
  auto shifted = estimate_deconv(c, make_noise_pmf(2, { 1.0 }), -8, 4);
  for (std::int64_t k = -8; k <= 4; ++k) {
    double expect = c.count(k + 2) ? c.at(k + 2) / 10.0 : 0.0;
    CHECK(std::fabs(shifted[k + 8] - expect) < 1e-12);
  }
  CHECK_THROWS_AS(estimate_deconv({}, delta, 0, 1), ValidationError);
  CHECK_THROWS_AS(estimate_deconv(c, make_noise_pmf(0, { 0.5, 0.5 }), 0, 1), ValidationError);
  CHECK_THROWS_AS(estimate_deconv(c, delta, 2, 1), ValidationError);
}

TEST_CASE("deconvolving f*p returns f")
{
  std::mt19937_64 rng(11);
  for (int t = 0; t < 10; ++t) {
    auto f = random_pmf(rng, 6, -2);
    IntegerPmf p = random_pmf(rng, 3, -1);
    // Make p* non-vanishing: heavy centre.
    p.probs[1] += 2;
    for (double& v : p.probs)
      v /= 3;
    auto g = convolve(f, p);
    std::map<std::int64_t, double> freqs;
    for (std::int64_t k = g.lo(); k <= g.hi(); ++k)
      freqs[k] = g(k);
    auto est = deconvolve(freqs, p, -6, 7);
    for (std::int64_t k = -6; k <= 7; ++k)
      CHECK(std::fabs(est[k + 6] - f(k)) < 1e-10);
  }
}

TEST_CASE("Monte Carlo mean of the deconvolution estimate")
{
  auto p = make_noise_pmf(0, { 0.75, 0.25 });
  const std::vector<double> f{ 0.3, 0.7 };
  std::mt19937_64 rng(2024);
  std::bernoulli_distribution theta(0.7), eps(0.25);
  const int R = 200, n = 400;
  std::vector<double> sum(4, 0), sq(4, 0);
  double mise = 0;
  for (int r = 0; r < R; ++r) {
    IntegerCounts c;
    for (int i = 0; i < n; ++i)
      ++c[int(theta(rng)) + int(eps(rng))];
    auto est = estimate_deconv(c, p, -1, 2, FourierGrid::make(512));
    double loss = 0;
    for (int j = 0; j < 4; ++j) {
      sum[j] += est[j];
      sq[j] += est[j] * est[j];
      const double truth = (j == 1 || j == 2) ? f[j - 1] : 0.0;
      loss += std::pow(est[j] - truth, 2);
    }
    mise += loss / R;
  }
  for (int j = 0; j < 4; ++j) {
    const double mean = sum[j] / R;
    const double se = std::sqrt((sq[j] / R - mean * mean) / (R - 1));
    const double truth = (j == 1 || j == 2) ? f[j - 1] : 0.0;
    CHECK(std::fabs(mean - truth) <= 3 * se + 1e-12);
  }
  // Only four of the coefficients enter the loss here, so n·MISE stays below K_p/(2π).
  CHECK(n * mise <= 2.0 * 1.2);
}

TEST_CASE("two-point deconvolution constants")
{
  auto p = make_noise_pmf(0, { 0.75, 0.25 });
  auto d0 = make_noise_pmf(0, { 1.0 }), d1 = make_noise_pmf(1, { 1.0 });
  auto c = thm4_constants(d0, d1, p);
  CHECK(c.c0 == doctest::Approx(2.0));
  CHECK(c.c1 == doctest::Approx(1.5));
  CHECK(c.asymptotic_lower == doctest::Approx(2.0 / 3));
  CHECK_FALSE(c.non_identifiable);
  auto same = thm4_constants(d0, d0, p);
  CHECK(same.c0 == 0);
  CHECK(same.c1 == 0);
  CHECK(same.non_identifiable);

  std::mt19937_64 rng(5);
  for (int t = 0; t < 30; ++t) {
    auto f0 = random_pmf(rng, 4, 0), f1 = random_pmf(rng, 5, -1);
    IntegerPmf q = random_pmf(rng, 3, 0);
    q.probs[0] += 3;
    for (double& v : q.probs)
      v /= 4;
    auto a = thm4_constants(f0, f1, q), b = thm4_constants(f1, f0, q);
    CHECK(a.c0 == doctest::Approx(b.c0).epsilon(1e-14));
    CHECK(a.c1 == doctest::Approx(b.c1).epsilon(1e-14));
    CHECK(a.asymptotic_lower <= Kp(q).value / (2 * PI));
  }
}

TEST_CASE("Fisher information of the two-point model")
{
  auto d0 = make_noise_pmf(0, { 1.0 }), d1 = make_noise_pmf(1, { 1.0 });
  CHECK(fisher_info(0.5, d0, d1, d0) == doctest::Approx(4.0));
  for (double w : { 0.1, 0.3, 0.8 })
    CHECK(fisher_info(w, d0, d1, d0) == doctest::Approx(1 / (1 - w) + 1 / w));
  CHECK(fisher_info(0.4, d0, d0, d0) == 0.0);
  auto p = make_noise_pmf(0, { 0.75, 0.25 });
  std::mt19937_64 rng(9);
  for (int t = 0; t < 10; ++t) {
    auto f0 = random_pmf(rng, 4, 0), f1 = random_pmf(rng, 3, 2);
    for (double w : { 0.2, 0.5, 0.9 })
      CHECK(fisher_info(w, f0, f1, p) == doctest::Approx(fisher_info(1 - w, f1, f0, p)).epsilon(1e-13));
  }
  CHECK_THROWS_AS(fisher_info(0.0, d0, d1, p), ValidationError);
  CHECK_THROWS_AS(fisher_info(1.0, d0, d1, p), ValidationError);
}
