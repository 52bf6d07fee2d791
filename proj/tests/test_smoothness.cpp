#include "demix/errors.hpp"
#include "demix/smoothness.hpp"

#include <doctest.h>

#include <cmath>

using namespace demix;

namespace {

const double PHI00 = 1 / std::sqrt((1 - std::exp(-2.0)) / 2);
Density uniform01 = [](double t) { return (t >= 0 && t <= 1) ? 1.0 : 0.0; };
auto P = PowerSeriesFamily::poisson();
auto I01 = MeasureSpec::interval(0, 1);

} // namespace

TEST_CASE("smoothness sequences")
{
  auto u = SmoothnessSeq::power(2);
  CHECK(u(0) == 1.0);
  CHECK(u(3) == doctest::Approx(1.0 / 16));
  auto t = SmoothnessSeq::tabulated({ 1, 0.5, 0.5, 0.1 });
  CHECK(t(3) == 0.1);
  CHECK_THROWS_AS(t(4), ValidationError);
  CHECK_THROWS_AS(SmoothnessSeq::tabulated({ 1, 2 }), ValidationError);
  CHECK_THROWS_AS(SmoothnessSeq::tabulated({ 1, 0 }), ValidationError);
  CHECK_THROWS_AS(SmoothnessSeq::power(-1), ValidationError);
}

TEST_CASE("approximation error sequence")
{
  auto seq = approx_error_seq(uniform01, P, I01, 12);
  CHECK(seq[0] == doctest::Approx(1.0));
  CHECK(seq[1] == doctest::Approx(std::sqrt(1 - std::pow(PHI00 * (1 - std::exp(-1.0)), 2))));
  for (int m = 1; m <= 12; ++m)
    CHECK(seq[m] <= seq[m - 1]);

  auto B = Basis::build(P, I01, 2);
  Density v2 = [&](double t) { return 0.3 * B->phi(0, t) - 1.7 * B->phi(1, t); };
  auto s2 = approx_error_seq(v2, P, I01, 8);
  CHECK(s2[0] == doctest::Approx(std::hypot(0.3, 1.7)));
  for (int m = 2; m <= 8; ++m)
    CHECK(s2[m] < 1e-8);
}

TEST_CASE("class membership")
{
  const double threshold = std::log2(1 / approx_error_seq(uniform01, P, I01, 1)[1]);
  CHECK(threshold == doctest::Approx(1.861).epsilon(1e-3));
  ClassSpec in{ SmoothnessSeq::power(threshold - 0.01), 1.0, 0, {}, {} };
  ClassSpec out{ SmoothnessSeq::power(threshold + 0.01), 1.0, 0, {}, {} };
  CHECK(class_member(uniform01, in, P, I01, 20).member);
  auto v = class_member(uniform01, out, P, I01, 20);
  CHECK_FALSE(v.member);
  CHECK(v.first_violation == 1);
  CHECK(v.m_max == 20);

  auto B = Basis::build(P, I01, 1);
  Density v1 = [&](double t) { return 2.5 * B->phi(0, t); };
  for (double a : { 0.5, 3.0, 20.0 })
    CHECK(class_member(v1, { SmoothnessSeq::power(a), 2.5, 1, {}, {} }, P, I01, 15).member);
  CHECK_FALSE(class_member(uniform01, { SmoothnessSeq::power(1), 0.0, 0, {}, {} }, P, I01, 5).member);

  ClassSpec withK{ SmoothnessSeq::power(1), 1.0, 0, 0.5, uniform01 };
  Density half = [](double) { return 0.5; };
  CHECK(class_member(half, withK, P, I01, 5).member);
  withK.K = 0.4;
  CHECK_FALSE(class_member(half, withK, P, I01, 5).member);
  CHECK_THROWS_AS(class_member(half, { SmoothnessSeq::power(1), 1, 6, {}, {} }, P, I01, 5), ValidationError);
}

TEST_CASE("sup-ratio norm and K_inf")
{
  auto grid = theta_grid(0, 1);
  CHECK(grid.size() == 4096);
  Density f0 = [](double t) { return 1 + t; };
  Density f2 = [](double t) { return 2 + 2 * t; };
  CHECK(sup_ratio_norm(f0, f0, grid) == doctest::Approx(1.0));
  CHECK(sup_ratio_norm(f2, f0, grid) == doctest::Approx(2.0));
  Density gap = [](double t) { return t < 0.5 ? 0.0 : 1.0; };
  Density zero = [](double) { return 0.0; };
  CHECK(sup_ratio_norm(zero, gap, grid) == 0.0);
  CHECK(std::isinf(sup_ratio_norm(f0, gap, grid)));

  auto B = Basis::build(P, I01, 12);
  Density phi0 = [&](double t) { return B->phi(0, t); };
  CHECK(sup_ratio_norm(phi0, uniform01, grid) == doctest::Approx(PHI00));
  CHECK(k_inf(*B, { 0 }, uniform01, grid) == doctest::Approx(PHI00));

  // f0 ∝ φ0: the ratio is constant.
  const double l1 = PHI00 * (1 - std::exp(-1.0));
  Density f0p = [&](double t) { return B->phi(0, t) / l1; };
  CHECK(k_inf(*B, { 0 }, f0p, grid) == doctest::Approx(l1));

  // Linear growth in m of K_inf(V_m).
  double worst = 0;
  for (int m = 2; m <= 12; ++m) {
    std::vector<int> rows;
    for (int k = 0; k < m; ++k)
      rows.push_back(k);
    worst = std::max(worst, k_inf(*B, rows, uniform01, grid) / m);
  }
  // √(Σ q_k²) at the endpoint of [0,1] behaves like m·const.
  CHECK(worst < 3.0);
}

TEST_CASE("span{φ_m, φ_{m+1}} is the orthogonal complement of V_m in V_{m+2}")
{
  auto B = Basis::build(P, I01, 10);
  const Rule& r = B->rule();
  const auto& pn = B->basis_nodes();
  for (int m = 0; m + 2 <= 10; ++m)
    for (int j = 0; j < m; ++j)
      for (int k : { m, m + 1 }) {
        long double s = 0;
        for (std::size_t i = 0; i < r.size(); ++i)
          s += r.weights[i] * pn[i * 10 + j] * pn[i * 10 + k];
        CHECK(std::fabs(double(s)) < 1e-10);
      }
}

TEST_CASE("smooth density factory")
{
  auto u2 = SmoothnessSeq::power(2);
  auto f = smooth_density_factory(P, I01, u2, 1, 1.5);
  for (int k = 0; k <= f.k_max; ++k)
    CHECK((std::isfinite(double(f.log_alpha[k])) && f.alpha(k) > 0));
  Rule r = gauss_legendre(256, 0, 1);
  long double mass = 0;
  for (std::size_t i = 0; i < r.size(); ++i)
    mass += r.weights[i] * f(double(r.nodes[i]));
  CHECK(std::fabs(double(mass) - 1) < 1e-8);
  CHECK(f.k_max == 2000);
  CHECK(f.tail == doctest::Approx(u2(2001)));
  CHECK(f.class_constant <= 1.5);
  CHECK(class_member(f.as_density(), { u2, 1.5, 1, {}, {} }, P, I01, 25).member);
  CHECK(class_member(f.as_density(), { u2, f.class_constant, 1, {}, {} }, P, I01, 25).member);

  // r = 0 requires C ≥ C0.
  auto g = smooth_density_factory(P, I01, u2, 0, 1e6);
  CHECK(g.class_constant < 1e6);
  CHECK_THROWS_AS(smooth_density_factory(P, I01, u2, 0, 0.5 * g.class_constant), ValidationError);
  CHECK(class_member(g.as_density(), { u2, g.class_constant, 0, {}, {} }, P, I01, 20).member);

  // Slowly decaying tails hit the cap; membership holds for any cap.
  auto G = PowerSeriesFamily::geometric();
  auto H = MeasureSpec::interval(0, 0.5);
  auto capped = smooth_density_factory(G, H, u2, 1, 1.0, 300);
  CHECK(capped.k_max == 300);
  CHECK(capped.tail > 0);
  for (int k = 0; k <= capped.k_max; ++k)
    CHECK(std::isfinite(double(capped.log_alpha[k])));
  CHECK(class_member(capped.as_density(), { u2, 1.0, 1, {}, {} }, G, H, 20).member);
  Rule rh = gauss_legendre(256, 0, 0.5);
  long double mh = 0;
  for (std::size_t i = 0; i < rh.size(); ++i)
    mh += rh.weights[i] * capped(double(rh.nodes[i]));
  CHECK(std::fabs(double(mh) - 1) < 1e-8);
}

TEST_CASE("two-point fixture")
{
  for (int m : { 0, 1, 3, 6 }) {
    auto B = Basis::build(P, I01, m + 2);
    auto g = two_point_fixture(B, m, 0.37);
    CHECK(std::hypot(g.alpha, g.beta) == doctest::Approx(0.37).epsilon(1e-15));
    const Rule& r = B->rule();
    long double nuf = 0;
    std::vector<long double> dots(m + 2, 0);
    std::vector<long double> v(m + 2);
    for (std::size_t i = 0; i < r.size(); ++i) {
      double t = double(r.nodes[i]);
      B->eval(t, v.data());
      nuf += r.weights[i] * g(t);
      for (int j = 0; j < m + 2; ++j)
        dots[j] += r.weights[i] * g(t) * v[j];
    }
    CHECK(std::fabs(double(nuf)) < 1e-8);
    for (int j = 0; j < m; ++j)
      CHECK(std::fabs(double(dots[j])) < 1e-8);
    CHECK(double(std::hypot(dots[m], dots[m + 1])) == doctest::Approx(0.37).epsilon(1e-8));
  }
  CHECK_THROWS_AS(two_point_fixture(Basis::build(P, I01, 3), 2, 1.0), ValidationError);
}

TEST_CASE("f0 ± g stay densities when the sup-ratio is at most one")
{
  auto u2 = SmoothnessSeq::power(2);
  auto f0 = smooth_density_factory(P, I01, u2, 1, 1.5).as_density();
  auto grid = theta_grid(0, 1);
  for (int m : { 1, 2, 4 }) {
    auto B = Basis::build(P, I01, m + 2);
    const double kinf = k_inf(*B, { m, m + 1 }, f0, grid);
    auto g = two_point_fixture(B, m, 0.999 / kinf);
    Density gd = [&](double t) { return g(t); };
    REQUIRE(sup_ratio_norm(gd, f0, grid) <= 1.0);
    const Rule& r = B->rule();
    long double mp = 0, mm = 0;
    for (double t : grid) {
      CHECK(f0(t) + g(t) >= 0);
      CHECK(f0(t) - g(t) >= 0);
    }
    for (std::size_t i = 0; i < r.size(); ++i) {
      double t = double(r.nodes[i]);
      mp += r.weights[i] * (f0(t) + g(t));
      mm += r.weights[i] * (f0(t) - g(t));
    }
    CHECK(double(mp) == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(double(mm) == doctest::Approx(1.0).epsilon(1e-8));
  }
}

TEST_CASE("lower bound evaluator")
{
  auto u2 = SmoothnessSeq::power(2);
  auto f0 = smooth_density_factory(P, I01, u2, 1, 1.5).as_density();
  ClassSpec spec{ u2, 1.5, 1, 1.0, f0 };
  auto B = Basis::build(P, I01, 6);
  auto grid = theta_grid(0, 1);
  const int m = 3;
  const double amp = std::min(1.0 / k_inf(*B, { m, m + 1 }, f0, grid), 1.5 * u2(m + 1));
  CHECK(lower_bound_rhs(f0, spec, *B, m, 0) == doctest::Approx(amp * amp));
  double prev = INFINITY;
  for (double n : { 1.0, 10.0, 100.0, 1000.0 }) {
    double v = lower_bound_rhs(f0, spec, *B, m, n);
    CHECK(v < prev);
    prev = v;
  }
  spec.K = 1.5;
  CHECK_THROWS_AS(lower_bound_rhs(f0, spec, *B, m, 10), ValidationError);
  spec.K = 1.0;
  CHECK_THROWS_AS(lower_bound_rhs(f0, spec, *B, 5, 10), ValidationError);
  CHECK_THROWS_AS(lower_bound_rhs(f0, spec, *B, 0, 10), ValidationError);
}

TEST_CASE("lower bound below the upper bound on an inclusion pair")
{
  auto u2 = SmoothnessSeq::power(2);
  auto fac = smooth_density_factory(P, I01, u2, 1, 1.5);
  auto f0 = fac.as_density();
  ClassSpec spec{ u2, 1.5, 1, 1.0, f0 };
  auto B12 = Basis::build(P, I01, 12);
  for (int m = 1; m <= 6; ++m)
    for (double n : { 1e2, 1e4 }) {
      double lo = lower_bound_rhs(f0, spec, *B12, m, n);
      double hi = upper_bound_rhs(f0, 2.0, u2, 1.5 + fac.class_constant, *Basis::build(P, I01, m), n);
      CHECK(lo <= hi);
    }
}

TEST_CASE("weighted modulus")
{
  Density c = [](double) { return 3.0; };
  CHECK(weighted_modulus(c, 1, 0.1, 0, 1) == doctest::Approx(0.0));
  CHECK(weighted_modulus(c, 3, 0.1, 0, 1) == doctest::Approx(0.0));
  Density lin = [](double x) { return x; };
  for (double t : { 1e-3, 1e-2 })
    CHECK(weighted_modulus(lin, 1, t, 0, 1) == doctest::Approx(t * std::sqrt(1.0 / 6)).epsilon(1e-3));
  // Second differences annihilate linear functions.
  CHECK(weighted_modulus(lin, 2, 0.05, 0, 1) < 1e-12);
  Density wig = [](double x) { return std::sin(7 * x); };
  double prev = 0;
  for (double t : { 0.01, 0.02, 0.05, 0.1, 0.3 }) {
    double w = weighted_modulus(wig, 2, t, 0, 1);
    CHECK(w >= prev);
    prev = w;
  }
  CHECK_THROWS_AS(weighted_modulus(lin, 0, 0.1, 0, 1), ValidationError);
}
