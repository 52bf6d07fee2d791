#pragma once

#include "demix/mixands.hpp"
#include "demix/orthopoly.hpp"
#include <memory>
#include <vector>

namespace demix {

//! Orthonormal basis φ_k = q_k^{ν′} Z̃ of V_m = span{Π1_k : k < m} in
//! H = L²(ν), with dν′ = Z̃² dν.
class Basis
{
public:
  //! ν = Lebesgue on [a, b], 0 ≤ a < b < R. The ν′ recurrence is obtained by
  //! a discretized Stieltjes procedure on the 256-node Gauss-Legendre rule.
  static std::shared_ptr<const Basis> build(const PowerSeriesFamily& family,
                                            const MeasureSpec& measure,
                                            int m,
                                            bool allow_beyond_ceiling = false);

  //! Poisson mixands on Θ = [0, ∞) with ν Lebesgue; ν′ is e^{-2t} dt.
  static std::shared_ptr<const Basis> halfline(int m, bool allow_beyond_ceiling = false);

  int m() const { return m_; }
  const PowerSeriesFamily& family() const { return family_; }
  //! ν; for the half-line basis this is reported as exp-weight(2) = ν′.
  const MeasureSpec& measure() const { return measure_; }
  bool half_line() const { return half_line_; }
  double lower() const { return lower_; }
  double upper() const { return upper_; }

  const RecurrenceCoeffs& recurrence() const { return rec_; }
  const CoeffMatrix& Q() const { return Q_; }
  //! Φ_{k,l} = Q_{k,l}/a_l, l ≤ k.
  const std::vector<std::vector<Real>>& Phi() const { return phi_; }

  //! Quadrature for ∫ g dν over Θ.
  const Rule& rule() const { return rule_; }
  //! Z̃ at rule nodes.
  const std::vector<Real>& ztilde_nodes() const { return zt_; }
  //! φ_k at rule node i: basis_nodes()[i*m + k].
  const std::vector<Real>& basis_nodes() const { return phi_nodes_; }

  //! φ_0..φ_{m-1} at θ; zero outside Θ.
  void eval(Real theta, Real* out) const;
  double phi(int k, double theta) const;
  bool contains(double theta) const { return theta >= lower_ && theta <= upper_; }

private:
  Basis() = default;
  void finish();

  PowerSeriesFamily family_ = PowerSeriesFamily::poisson();
  MeasureSpec measure_;
  bool half_line_ = false;
  double lower_ = 0, upper_ = 1;
  int m_ = 0;
  RecurrenceCoeffs rec_;
  CoeffMatrix Q_;
  std::vector<std::vector<Real>> phi_;
  Rule rule_;
  std::vector<Real> zt_;
  std::vector<Real> phi_nodes_;
};

using BasisPtr = std::shared_ptr<const Basis>;

struct PhiMatrix
{
  int m = 0;
  std::vector<std::vector<Real>> phi;
};

PhiMatrix phi_matrix(const PowerSeriesFamily& family, const MeasureSpec& measure, int m);

//! Element of V_m: Σ c_k φ_k.
struct Estimate
{
  std::vector<double> coeffs;
  BasisPtr basis;

  double operator()(double theta) const;
  //! ‖·‖²_H = Σ c_k².
  double norm_sq() const;
};

//! ‖e1 − e2‖_H for estimates on the same basis.
double h_distance(const Estimate& e1, const Estimate& e2);

Estimate estimate_projection(const EmpiricalCounts& counts, BasisPtr basis);
Estimate estimate_projection(const EmpiricalCounts& counts,
                             const PowerSeriesFamily& family,
                             const MeasureSpec& measure,
                             int m);

Estimate estimate_halfline(const EmpiricalCounts& counts, int m);

//! f̌ = Z Σ_k d_k q_k^ν with d_k = Σ_{l≤k} Q^ν_{k,l} (n_l/n) / a_l.
struct CheckEstimate
{
  std::vector<Real> d;
  RecurrenceCoeffs rec_nu;
  PowerSeriesFamily family = PowerSeriesFamily::poisson();
  MeasureSpec measure;

  double operator()(double theta) const;
};

CheckEstimate estimate_check(const EmpiricalCounts& counts,
                             const PowerSeriesFamily& family,
                             const MeasureSpec& measure,
                             int m);

//! Coefficients of Proj_{V_m} f̌ in the basis.
std::vector<double> project_check(const CheckEstimate& check, const Basis& basis);

struct GramFactor;

//! R_{k,l} = (Π1_k, Π1_l)_H, assembled and factorized in quad precision.
struct GramMatrix
{
  int m = 0;
  std::vector<std::vector<double>> R;
  //! 1-norm condition number of the diagonally equilibrated matrix.
  double condition = 1;
  std::shared_ptr<const GramFactor> factor;
};

//! Condition numbers are judged against this limit scaled from double to the
//! working precision of the solve.
constexpr double gram_condition_limit = 1e12;

GramMatrix gram_matrix(const Basis& basis);
GramMatrix gram_matrix(const PowerSeriesFamily& family, const MeasureSpec& measure, int m);

//! diag(R_m^{-1}).
std::vector<double> gram_inverse_diagonal(const GramMatrix& gram);
//! R_m^{-1} (dense).
std::vector<std::vector<double>> gram_inverse(const GramMatrix& gram);

//! Solve R x = (n_k/n)_{k<m}, then express Σ x_k Π1_k in the basis.
Estimate estimate_gram(const EmpiricalCounts& counts, BasisPtr basis);
Estimate estimate_gram(const EmpiricalCounts& counts,
                       const PowerSeriesFamily& family,
                       const MeasureSpec& measure,
                       int m);

struct Projection
{
  std::vector<double> coeffs;
  double residual_norm;
  double norm_sq;
};

Projection project_density(const Density& f, const Basis& basis);

//! ‖f − Proj_{V_k} f‖_H for k = 0..m, summed over the nodes.
std::vector<double> residual_norms(const Density& f, const Basis& basis);

//! π_f(x) = (f, Π1_x)_H for x < count.
std::vector<double> mixture_probs(const Density& f, const Basis& basis, int count);

struct MiseDecomposition
{
  double bias_sq;
  double variance;
  double total;
};

MiseDecomposition exact_mise(const Density& f, const Basis& basis, double n);

//! (K/n) Σ_k (R_m^{-1})_{kk} π_{f_inf}(k).
double variance_bound(const Density& f_inf, double K, const Basis& basis, double n);

//! Outside the estimator's analysis: max(f̂, 0) rescaled to unit ν-mass.
Density clipped_density(const Estimate& estimate);

} // namespace demix
