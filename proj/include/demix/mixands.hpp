#pragma once

#include "demix/orthopoly.hpp"
#include "demix/precision.hpp"
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

namespace demix {

//! Density (or any real function) on the parameter space.
using Density = std::function<double(double)>;

//! Power-series mixands π_θ(k) = a_k θ^k / Z(θ), Z(t) = Σ a_k t^k.
class PowerSeriesFamily
{
public:
  static PowerSeriesFamily poisson();
  static PowerSeriesFamily negative_binomial(double shape);
  static PowerSeriesFamily geometric() { return negative_binomial(1.0); }
  //! a(0) must be 1 and a(k) > 0. Z is summed numerically.
  static PowerSeriesFamily custom(std::string name,
                                  std::function<double(int)> a,
                                  double radius);

  const std::string& name() const;
  double radius() const;
  bool is_poisson() const;
  double shape() const;

  Real a(int k) const;
  Real log_a(int k) const;
  Real Z(Real t) const;
  Real log_Z(Real t) const;

private:
  struct Impl;
  std::shared_ptr<const Impl> impl_;
};

double ps_pmf(const PowerSeriesFamily& family, double theta, int k);
double ps_Z(const PowerSeriesFamily& family, double t);

//! ν Π1_k = ∫_a^b a_k θ^k Z̃(θ) dθ.
double nu_pi(const PowerSeriesFamily& family, const MeasureSpec& measure, int k);

//! ‖Π1_k‖_H.
double pi_norm(const PowerSeriesFamily& family, const MeasureSpec& measure, int k);

//! Logarithms of the two quantities above; usable far beyond double range.
Real log_nu_pi(const PowerSeriesFamily& family, const MeasureSpec& measure, int k);
Real log_pi_norm(const PowerSeriesFamily& family, const MeasureSpec& measure, int k);

//! Σ_{k ≥ m} νΠ1_k, summed directly until terms fall below tol relative to the sum.
double nu_pi_tail(const PowerSeriesFamily& family,
                  const MeasureSpec& measure,
                  int m,
                  double tol = 1e-12);

//! c0 · a_m ∫_a^b t^m dt.
double tail_bound(const PowerSeriesFamily& family,
                  const MeasureSpec& measure,
                  int m,
                  double c0);

struct A2Check
{
  bool holds;
  double L;
};

//! a_{k+l} ≤ c0 a_k a_l for k + l ≤ kmax; L = min_{1≤n≤kmax} (log c0 + log a_n)/n.
A2Check check_A2(const PowerSeriesFamily& family, double c0, int kmax);

double uniform_pmf(std::int64_t theta, std::int64_t k);

//! Finitely supported real sequence on Z: value at offset + i is probs[i].
struct IntegerPmf
{
  std::int64_t offset = 0;
  std::vector<double> probs;

  double operator()(std::int64_t k) const;
  std::int64_t lo() const { return offset; }
  std::int64_t hi() const { return offset + static_cast<std::int64_t>(probs.size()) - 1; }
};

using NoisePmf = IntegerPmf;

//! Validated pmf: nonnegative, sums to 1 within 1e-12.
NoisePmf make_noise_pmf(std::int64_t offset, std::vector<double> probs);

//! Histogram of nonnegative integer observations.
class EmpiricalCounts
{
public:
  EmpiricalCounts() = default;
  static EmpiricalCounts from_map(const std::map<std::int64_t, std::int64_t>& counts);
  static EmpiricalCounts from_observations(const std::vector<std::int64_t>& xs);

  void add(std::int64_t k, std::uint64_t count = 1);
  std::uint64_t count(std::int64_t k) const;
  std::uint64_t n() const { return n_; }
  double frequency(std::int64_t k) const;
  bool empty() const { return n_ == 0; }
  //! Dense counts for k = 0..max_value().
  const std::vector<std::uint64_t>& dense() const { return counts_; }
  std::int64_t max_value() const { return static_cast<std::int64_t>(counts_.size()) - 1; }

  bool operator==(const EmpiricalCounts& o) const = default;

private:
  std::vector<std::uint64_t> counts_;
  std::uint64_t n_ = 0;
};

} // namespace demix
