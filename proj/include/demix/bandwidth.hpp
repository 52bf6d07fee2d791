#pragma once

#include "demix/mixands.hpp"
#include "demix/smoothness.hpp"
#include <optional>

namespace demix {

//! λ = γ + √(γ²+1), γ = (2+a+b)/(b−a). Only a < b is required, so
//! diagnostic intervals such as [−1, 1] are accepted.
double lambda_ab(double a, double b);

//! ⌈τ log n / log log n⌉, n ≥ 16, 0 < τ ≤ 1.
int poisson_mn(double n, double tau = 1);

struct FiniteRRule
{
  double tau_max;
  double tau;
  int m_n;
};

//! τ_max = 1/log(λ² max(1, bR)); m_n = ⌈τ log n⌉ with τ defaulting to τ_max/2.
FiniteRRule finiteR_rule(const PowerSeriesFamily& family,
                         double a,
                         double b,
                         double n,
                         std::optional<double> tau = {});

//! (1/n) λ1^{2m} max_{0≤k<m} b^k/a_k, requiring λ1 > λ(a, b).
double cond45(const PowerSeriesFamily& family, double a, double b, double lambda1, int m, double n);

//! Smallest c0 with a_{k+l} ≤ c0 a_k a_l for k + l ≤ kmax.
double a2_constant(const PowerSeriesFamily& family, int kmax = 60);

struct WnResult
{
  double value;
  //! n c0 a_m ∫ t^m dν with c0 = a2_constant(family).
  double moment_bound;
};

//! n Σ_{k≥m} νΠ1_k, summed directly to relative tolerance 1e-12.
WnResult wn(const PowerSeriesFamily& family, const MeasureSpec& measure, int m, double n);

//! Guide value −1/(τ log(b/R)) for the wn scan factor η; the caller picks η above it.
double eta_guide(const PowerSeriesFamily& family, double b, double tau);

//! Largest m with λ1^m/u_m ≤ 0.1 √n, or 0. Requires λ1 above the half-line growth root.
int halfline_mn(double n, double lambda1, const SmoothnessSeq& u);

struct DecayCheck
{
  //! Least-squares slope of log(value) against log(n).
  double slope;
  bool decreasing;
};

//! Trend test for sequences that should go to 0 but move in ceiling steps:
//! negative log-log slope and last value below the first.
DecayCheck decay_check(const std::vector<double>& ns, const std::vector<double>& values);

} // namespace demix
