#pragma once

#include "demix/projector.hpp"
#include <array>
#include <functional>

namespace demix {

//! Mixing pmf on {1, 2, ...}; entry i is f(i+1).
using ThetaPmf = std::vector<double>;

//! f̂(k) = k (n_{k−1} − n_k)/n for k = 1..m; entry k−1 holds f̂(k). Returned raw.
std::vector<double> estimate_uniform(const EmpiricalCounts& counts, int m);

//! π_f(k) = Σ_{θ>k} f(θ)/θ, the mixture pmf at k.
double uniform_mixture_pmf(const ThetaPmf& f, std::int64_t k);

//! Σ_{θ>m} f² + (1/n) Σ_{k<m} (k+1)² (π_f(k) + π_f(k+1)).
double mise_bound_uniform(const ThetaPmf& f, int m, double n);

//! Same bound for unbounded support; θ runs until the summed mass reaches
//! 1 − 1e-12 (at most max_theta).
double mise_bound_uniform(const std::function<double(std::int64_t)>& f,
                          int m,
                          double n,
                          std::int64_t max_theta = 10'000'000);

//! Exact MISE of f̂_{m,n}: Σ_{θ>m} f² plus the mean bias and variance of each f̂(k).
MiseDecomposition exact_mise_uniform(const ThetaPmf& f, int m, double n);

struct UniformFixture
{
  int m;
  //! g(m), g(m+1), g(m+2); Σg = 0, Σ g(θ)/θ = 0, first entry positive.
  std::array<double, 3> g;
  //! f0(θ) for θ = 1..m+2.
  ThetaPmf f0;

  ThetaPmf plus() const;
  ThetaPmf minus() const;
};

//! ‖g‖ = C·u_next/2. Throws when Σ|g| > 1 leaves f0(1) < 0.
UniformFixture fixture_g(int m, double C, double u_next);

//! ⌈τ n^β⌉ with 0 < β < 1/2.
int bandwidth_uniform(double n, double tau, double beta);

//! (C u_{m+1}/2)² (1 − √5 C u_{m+1}/(2m))^n.
double uniform_lower_bound(double C, double u_next, int m, double n);

//! (C u_m)² + 2m²/n.
double uniform_upper_bound(double C, double u_m, int m, double n);

} // namespace demix
