#pragma once

#include "demix/precision.hpp"
#include "demix/quadrature.hpp"
#include <string>
#include <vector>

namespace demix {

//! Reference measure: Lebesgue on [a, b], or e^{-rate·t} dt on [0, ∞).
class MeasureSpec
{
public:
  enum class Kind
  {
    interval,
    exp_weight
  };

  static MeasureSpec interval(double a, double b);
  static MeasureSpec legendre() { return interval(-1.0, 1.0); }
  //! rate ∈ {1, 2}.
  static MeasureSpec exp_weight(int rate);

  Kind kind() const { return kind_; }
  double a() const { return a_; }
  double b() const { return b_; }
  int rate() const { return rate_; }
  bool bounded() const { return kind_ == Kind::interval; }
  std::string describe() const;

private:
  Kind kind_ = Kind::interval;
  double a_ = 0, b_ = 1;
  int rate_ = 0;
};

//! Orthonormal three-term recurrence
//!   √β_{k+1} q_{k+1} = (t − α_k) q_k − √β_k q_{k−1},  q_0 = 1/√β_0,
//! with β_0 the total mass. Entry k holds (α_k, β_k).
struct RecurrenceCoeffs
{
  std::vector<Real> alpha;
  std::vector<Real> beta;

  int size() const { return static_cast<int>(alpha.size()); }
};

constexpr int default_max_degree = 30;

//! Closed-form coefficients, k = 0..count-1.
RecurrenceCoeffs recurrence_for(const MeasureSpec& measure, int count);

//! Discretized Stieltjes procedure on a positive discrete measure.
RecurrenceCoeffs stieltjes(const Rule& measure, int count);

//! Lower-triangular table, row k = coefficients of q_k in the monomials.
struct CoeffMatrix
{
  int m = 0;
  std::vector<std::vector<Real>> q;

  Real operator()(int k, int l) const { return l <= k ? q[k][l] : Real(0); }
};

//! Rows 0..m-1. Throws PrecisionError past default_max_degree unless
//! allow_beyond_ceiling, NumericalError on overflow.
CoeffMatrix orthonormal_coeffs(const RecurrenceCoeffs& coeffs,
                               int m,
                               bool allow_beyond_ceiling = false);

//! Horner evaluation of row k. Loses accuracy for large k on wide supports;
//! prefer eval_recurrence there.
double eval_orthopoly(const CoeffMatrix& Q, int k, double t);

//! q_0(t)..q_{m-1}(t) by the recurrence (numerically stable).
void eval_recurrence(const RecurrenceCoeffs& coeffs, int m, Real t, Real* out);
std::vector<Real> eval_recurrence(const RecurrenceCoeffs& coeffs, int m, Real t);

//! Quadrature for ∫ g dν₀, weights include the density of ν₀.
Rule measure_rule(const MeasureSpec& measure);

//! ∫ t^j dν₀, j < count, in extended precision.
std::vector<OracleReal> exact_moments(const MeasureSpec& measure, int count);

//! Cholesky of the Hankel moment matrix; rows of L^{-1}.
CoeffMatrix gram_schmidt_oracle(const std::vector<OracleReal>& moments, int m);
CoeffMatrix gram_schmidt_oracle(const std::vector<double>& moments, int m);

//! s_k = Σ_l (Q_{k,l}/a_l)², a_l = 1 when weights is empty.
std::vector<double> coeff_growth(const CoeffMatrix& Q,
                                 const std::vector<double>& weights = {});

//! Growth root for the squared-Laguerre measure with factorial
//! weights: positive root of x² − 4x − 1.
inline double halfline_growth_root() { return 4.23606797749978969641; }

} // namespace demix
