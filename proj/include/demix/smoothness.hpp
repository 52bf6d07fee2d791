#pragma once

#include "demix/projector.hpp"
#include <optional>
#include <vector>

namespace demix {

//! Positive non-increasing sequence (u_m).
class SmoothnessSeq
{
public:
  //! u_m = (1+m)^{-alpha}, alpha ≥ 0.
  static SmoothnessSeq power(double alpha);
  //! Explicit values; indices beyond the table are rejected.
  static SmoothnessSeq tabulated(std::vector<double> values);

  double operator()(int m) const;
  bool is_power() const { return table_.empty(); }
  double alpha() const { return alpha_; }

private:
  double alpha_ = 0;
  std::vector<double> table_;
};

//! C(u, C, r), optionally intersected with ‖f‖_{∞,f0} ≤ K.
struct ClassSpec
{
  SmoothnessSeq u = SmoothnessSeq::power(1);
  double C = 0;
  int r = 0;
  std::optional<double> K;
  Density f0;
};

//! ‖f − Proj_{V_m} f‖_H for m = 0..m_max.
std::vector<double> approx_error_seq(const Density& f,
                                     const PowerSeriesFamily& family,
                                     const MeasureSpec& measure,
                                     int m_max);

struct Membership
{
  bool member;
  //! The verdict only covers r ≤ m ≤ m_max.
  int m_max;
  //! First m with a residual violation, or -1.
  int first_violation;
  //! Sup-ratio on the grid when K is present.
  double sup_ratio;
};

Membership class_member(const Density& f,
                        const ClassSpec& spec,
                        const PowerSeriesFamily& family,
                        const MeasureSpec& measure,
                        int m_max);

//! Uniform grid of `points` nodes on [a, b]; a lower bound on sup-norms.
std::vector<double> theta_grid(double a, double b, int points = 4096);

//! max |f|/f0 over the grid, 0/0 = 0, s/0 = ∞.
double sup_ratio_norm(const Density& f, const Density& f0, const std::vector<double>& grid);

//! sup over the grid of √(Σ_{k ∈ rows} φ_k²)/f0.
double k_inf(const Basis& basis,
             const std::vector<int>& rows,
             const Density& f0,
             const std::vector<double>& grid);

//! (min(K/K_inf(span{φ_m, φ_{m+1}}), C u_{m+1}))² (Σ_{x<m} π_{f0}(x))^n.
//! The basis needs at least m+2 rows.
double lower_bound_rhs(const Density& f0,
                       const ClassSpec& spec,
                       const Basis& basis,
                       int m,
                       double n);

//! (C u_m)² + variance_bound(f_inf, K).
double upper_bound_rhs(const Density& f_inf,
                       double K,
                       const SmoothnessSeq& u,
                       double C,
                       const Basis& basis,
                       double n);

//! Σ_k α_k Π1_k with α_k ≥ 0.
struct SmoothDensity
{
  PowerSeriesFamily family = PowerSeriesFamily::poisson();
  MeasureSpec measure;
  //! log α_k, k = 0..k_max (α_k itself overflows for factorial-type a_k).
  std::vector<Real> log_alpha;
  //! Constant of the class the construction lands in: λ for r ≥ 1,
  //! (Σ β_k νΠ1_k)^{-1} for r = 0.
  double class_constant;
  //! Σ_{k>k_max} β_k ‖Π1_k‖, computed or bounded by v_{cap+1}.
  double tail;
  int k_max;

  double alpha(int k) const;
  double operator()(double theta) const;
  Density as_density() const;
};

//! Constructive smooth density. k_max caps the expansion; the truncation
//! point is the smallest k with tail below 1e-10 u_0, or the cap.
SmoothDensity smooth_density_factory(const PowerSeriesFamily& family,
                                     const MeasureSpec& measure,
                                     const SmoothnessSeq& u,
                                     int r,
                                     double C,
                                     int k_max = 2000);

//! f = α φ_m + β φ_{m+1} with ν f = 0, ‖f‖_H = target_norm.
struct TwoPointFixture
{
  double alpha;
  double beta;
  int m;
  BasisPtr basis;

  double operator()(double theta) const;
};

TwoPointFixture two_point_fixture(BasisPtr basis, int m, double target_norm);

//! Grid approximation of sup_{0<h≤t} ‖Δ^r_{hφ(·)}(f, ·)‖₂ on [a, b] with
//! φ(x) = √((x−a)(b−x)); 256 log-spaced h values in [t·1e-4, t].
double weighted_modulus(const Density& f, int r, double t, double a, double b);

} // namespace demix
