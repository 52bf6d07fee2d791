#include "demix/errors.hpp"
#include "demix/projector.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace demix;

namespace {

const double R00 = (1 - std::exp(-2.0)) / 2; // ∫₀¹ e^{-2θ}
const double PHI00 = 1 / std::sqrt(R00);

EmpiricalCounts poisson_uniform_sample(std::mt19937_64& rng, int n)
{
  std::uniform_real_distribution<double> U(0, 1);
  EmpiricalCounts c;
  for (int i = 0; i < n; ++i) {
    std::poisson_distribution<int> P(U(rng));
    c.add(P(rng));
  }
  return c;
}

EmpiricalCounts arbitrary_counts(std::mt19937_64& rng, int top)
{
  std::uniform_int_distribution<int> K(0, top), N(0, 40);
  EmpiricalCounts c;
  for (int k = 0; k <= top; ++k)
    c.add(K(rng), N(rng) + 1);
  return c;
}

Density uniform01 = [](double t) { return (t >= 0 && t <= 1) ? 1.0 : 0.0; };

} // namespace

TEST_CASE("Φ matrix")
{
  auto P = PowerSeriesFamily::poisson();
  auto phi = phi_matrix(P, MeasureSpec::interval(0, 1), 3);
  CHECK(double(phi.phi[0][0]) == doctest::Approx(PHI00).epsilon(1e-14));
  auto one = phi_matrix(PowerSeriesFamily::geometric(), MeasureSpec::interval(0, 0.5), 1);
  // ∫₀^0.5 (1−θ)² dθ = 7/24
  CHECK(double(one.phi[0][0]) == doctest::Approx(1 / std::sqrt(7.0 / 24)).epsilon(1e-14));
  auto hl = Basis::halfline(2);
  CHECK(double(hl->Phi()[0][0]) == doctest::Approx(std::sqrt(2.0)));
  CHECK_THROWS_AS(phi_matrix(P, MeasureSpec::interval(0, 1), 31), PrecisionError);
  CHECK_THROWS_AS(Basis::build(PowerSeriesFamily::geometric(), MeasureSpec::interval(0, 1), 2),
                  ValidationError);
}

TEST_CASE("basis is orthonormal in H")
{
  for (auto [fam, mu] : { std::pair{ PowerSeriesFamily::poisson(), MeasureSpec::interval(0, 1) },
                          std::pair{ PowerSeriesFamily::poisson(), MeasureSpec::interval(0.5, 4) },
                          std::pair{ PowerSeriesFamily::negative_binomial(2), MeasureSpec::interval(0, 0.6) } }) {
    auto B = Basis::build(fam, mu, 12);
    // Independent quadrature: 300-node rule and direct evaluation.
    Rule r = gauss_legendre(300, mu.a(), mu.b());
    std::vector<std::vector<long double>> G(12, std::vector<long double>(12, 0));
    std::vector<long double> v(12);
    for (std::size_t i = 0; i < r.size(); ++i) {
      B->eval(r.nodes[i], v.data());
      for (int k = 0; k < 12; ++k)
        for (int l = 0; l < 12; ++l)
          G[k][l] += r.weights[i] * v[k] * v[l];
    }
    for (int k = 0; k < 12; ++k)
      for (int l = 0; l < 12; ++l)
        CHECK(double(G[k][l]) == doctest::Approx(k == l ? 1.0 : 0.0).epsilon(1e-10).scale(1));
  }
}

TEST_CASE("projection estimator examples")
{
  auto P = PowerSeriesFamily::poisson();
  auto I = MeasureSpec::interval(0, 1);
  auto zeros = EmpiricalCounts::from_map({ { 0, 17 } });
  auto e0 = estimate_projection(zeros, P, I, 0);
  CHECK(e0.coeffs.empty());
  CHECK(e0(0.5) == 0.0);

  auto e1 = estimate_projection(zeros, P, I, 1);
  CHECK(e1.coeffs[0] == doctest::Approx(PHI00));
  for (double t : { 0.0, 0.3, 1.0 })
    CHECK(e1(t) == doctest::Approx(std::exp(-t) / R00));
  CHECK(e1(1.5) == 0.0);
  CHECK(e1.norm_sq() == doctest::Approx(1 / R00));

  auto h = estimate_halfline(zeros, 1);
  CHECK(h.coeffs[0] == doctest::Approx(std::sqrt(2.0)));
  CHECK(h(0.7) == doctest::Approx(2 * std::exp(-0.7)));
  CHECK(estimate_halfline(zeros, 0).coeffs.empty());

  CHECK_THROWS_AS(estimate_projection(EmpiricalCounts{}, P, I, 2), ValidationError);
}

TEST_CASE("observations at or above m are ignored")
{
  auto P = PowerSeriesFamily::poisson();
  auto I = MeasureSpec::interval(0, 1);
  auto B = Basis::build(P, I, 3);
  auto a = estimate_projection(EmpiricalCounts::from_map({ { 0, 2 }, { 1, 1 }, { 5, 1 } }), B);
  auto b = estimate_projection(EmpiricalCounts::from_map({ { 0, 2 }, { 1, 1 }, { 9, 1 } }), B);
  for (int k = 0; k < 3; ++k)
    CHECK(a.coeffs[k] == b.coeffs[k]);
}

TEST_CASE("Gram matrix")
{
  auto P = PowerSeriesFamily::poisson();
  auto I = MeasureSpec::interval(0, 1);
  CHECK(gram_matrix(P, I, 1).R[0][0] == doctest::Approx(R00).epsilon(1e-14));
  auto g2 = gram_matrix(P, I, 2);
  CHECK(g2.R[0][1] == doctest::Approx((1 - 3 * std::exp(-2.0)) / 4).epsilon(1e-14));
  CHECK(g2.R[1][0] == g2.R[0][1]);
  CHECK(gram_matrix(P, I, 0).m == 0);
}

TEST_CASE("R_m^{-1} = Φᵀ Φ for m <= 8")
{
  auto P = PowerSeriesFamily::poisson();
  for (auto mu : { MeasureSpec::interval(0, 1), MeasureSpec::interval(0.2, 2.5) }) {
    for (int m = 1; m <= 8; ++m) {
      auto B = Basis::build(P, mu, m);
      auto inv = gram_inverse(gram_matrix(*B));
      const auto& phi = B->Phi();
      for (int k = 0; k < m; ++k)
        for (int l = 0; l < m; ++l) {
          long double s = 0;
          for (int j = std::max(k, l); j < m; ++j)
            s += phi[j][k] * phi[j][l];
          double scale = std::sqrt(inv[k][k] * inv[l][l]);
          CHECK(std::fabs(inv[k][l] - double(s)) <= 1e-8 * scale);
        }
    }
  }
}

TEST_CASE("Gram route example and conditioning guard")
{
  auto P = PowerSeriesFamily::poisson();
  auto I = MeasureSpec::interval(0, 1);
  auto zeros = EmpiricalCounts::from_map({ { 0, 5 } });
  auto g = estimate_gram(zeros, P, I, 1);
  CHECK(g.coeffs[0] == doctest::Approx(PHI00));
  CHECK(g(0.4) == doctest::Approx(std::exp(-0.4) / R00));
  CHECK(estimate_gram(zeros, P, I, 0).coeffs.empty());
  // A narrow interval makes the monomial Gram matrix hopeless quickly.
  auto narrow = Basis::build(P, MeasureSpec::interval(1, 1.01), 20);
  CHECK_THROWS_AS(gram_matrix(*narrow), ConditioningError);
}

TEST_CASE("dual route agreement, m <= 10")
{
  auto P = PowerSeriesFamily::poisson();
  auto I = MeasureSpec::interval(0, 1);
  std::mt19937_64 rng(20240611);
  std::vector<BasisPtr> bases;
  for (int m = 0; m <= 10; ++m)
    bases.push_back(Basis::build(P, I, m));
  double worst = 0;
  for (int rep = 0; rep < 20; ++rep) {
    auto c = rep % 2 ? poisson_uniform_sample(rng, 50 + 25 * rep) : arbitrary_counts(rng, 10);
    for (int m = 0; m <= 10; ++m)
      worst = std::max(worst, h_distance(estimate_projection(c, bases[m]), estimate_gram(c, bases[m])));
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("check estimator")
{
  auto P = PowerSeriesFamily::poisson();
  auto I = MeasureSpec::interval(0, 1);
  auto c = EmpiricalCounts::from_map({ { 0, 3 }, { 1, 2 }, { 4, 1 } });
  auto f1 = estimate_check(c, P, I, 1);
  for (double t : { 0.0, 0.5, 1.0 })
    CHECK(f1(t) == doctest::Approx(0.5 * std::exp(t)));
  CHECK(estimate_check(c, P, I, 0)(0.3) == 0.0);

  std::mt19937_64 rng(7);
  for (int rep = 0; rep < 5; ++rep) {
    auto data = poisson_uniform_sample(rng, 300);
    for (int m = 1; m <= 8; ++m) {
      auto B = Basis::build(P, I, m);
      auto fhat = estimate_projection(data, B);
      auto proj = project_check(estimate_check(data, P, I, m), *B);
      for (int k = 0; k < m; ++k)
        CHECK(proj[k] == doctest::Approx(fhat.coeffs[k]).epsilon(1e-8).scale(1));
    }
  }
}

TEST_CASE("density projection")
{
  auto P = PowerSeriesFamily::poisson();
  auto I = MeasureSpec::interval(0, 1);
  auto B1 = Basis::build(P, I, 1);
  auto p = project_density(uniform01, *B1);
  const double c0 = PHI00 * (1 - std::exp(-1.0));
  CHECK(p.coeffs[0] == doctest::Approx(c0));
  CHECK(p.residual_norm == doctest::Approx(std::sqrt(1 - c0 * c0)));
  CHECK(p.residual_norm == doctest::Approx(0.27527).epsilon(1e-4));

  auto B4 = Basis::build(P, I, 4);
  auto phi0 = [&](double t) { return B4->phi(0, t); };
  auto q = project_density(phi0, *B4);
  CHECK(q.residual_norm < 1e-8);
  CHECK(q.coeffs[0] == doctest::Approx(1.0));

  double prev = INFINITY;
  for (int m = 0; m <= 10; ++m) {
    auto r = project_density([](double t) { return 6 * t * (1 - t); }, *Basis::build(P, I, m));
    CHECK(r.residual_norm <= prev + 1e-15);
    prev = r.residual_norm;
  }
}

TEST_CASE("exact MISE and the variance bound")
{
  auto P = PowerSeriesFamily::poisson();
  auto I = MeasureSpec::interval(0, 1);
  auto m0 = exact_mise(uniform01, *Basis::build(P, I, 0), 10);
  CHECK(m0.total == doctest::Approx(1.0));
  CHECK(m0.variance == 0.0);

  auto B1 = Basis::build(P, I, 1);
  auto e = exact_mise(uniform01, *B1, 1);
  const double c0 = PHI00 * (1 - std::exp(-1.0));
  CHECK(e.variance == doctest::Approx((1 - std::exp(-1.0)) / R00 - c0 * c0));
  CHECK(e.variance == doctest::Approx(0.53792).epsilon(1e-4));
  CHECK(e.total == e.bias_sq + e.variance);
  CHECK(variance_bound(uniform01, 1, *B1, 1) == doctest::Approx((1 - std::exp(-1.0)) / R00));
  CHECK(variance_bound(uniform01, 0, *B1, 1) == 0.0);

  for (auto f : { uniform01, Density([](double t) { return 6 * t * (1 - t); }),
                  Density([](double t) { return std::exp(t) / (std::exp(1.0) - 1); }) }) {
    for (int m = 1; m <= 8; ++m) {
      auto B = Basis::build(P, I, m);
      auto x = exact_mise(f, *B, 100);
      CHECK(x.variance < variance_bound(f, 1, *B, 100));
    }
  }
}

TEST_CASE("clipping post-processing")
{
  auto P = PowerSeriesFamily::poisson();
  auto I = MeasureSpec::interval(0, 1);
  auto e = estimate_projection(EmpiricalCounts::from_map({ { 0, 1 }, { 3, 4 } }), P, I, 4);
  auto g = clipped_density(e);
  Rule r = gauss_legendre(400, 0, 1);
  long double mass = 0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    CHECK(g(double(r.nodes[i])) >= 0);
    mass += r.weights[i] * g(double(r.nodes[i]));
  }
  CHECK(double(mass) == doctest::Approx(1.0).epsilon(1e-3));
}
