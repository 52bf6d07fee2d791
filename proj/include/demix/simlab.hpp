#pragma once

#include "demix/deconv.hpp"
#include "demix/projector.hpp"
#include "demix/uniformmix.hpp"
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>

namespace demix {

enum class Scenario
{
  power_series,
  deconv,
  uniform
};

//! How m is chosen per sample size.
struct MRule
{
  enum class Kind
  {
    fixed,
    poisson,
    finite_r,
    halfline,
    uniform
  };
  Kind kind = Kind::fixed;
  int m = 1;
  std::optional<double> tau;
  double beta = 0.25;
  //! halfline: growth base λ1 and smoothness exponent of u.
  double lambda1 = 4.5;
  double alpha = 1;
};

struct SimConfig
{
  Scenario scenario = Scenario::power_series;
  PowerSeriesFamily family = PowerSeriesFamily::poisson();
  //! Interval, or exp-weight(2) for the half-line Poisson estimator.
  MeasureSpec measure = MeasureSpec::interval(0, 1);
  MRule m_rule;
  //! power-series: density on Θ.
  Density true_f;
  //! deconv: pmf on Z; uniform: pmf on {1, 2, ...} (offset ≥ 1).
  IntegerPmf true_pmf;
  NoisePmf noise;
  std::int64_t kmin = 0, kmax = 0;
  std::vector<double> n_grid;
  int replicates = 1;
  std::uint64_t seed = 0;
};

struct MiseRow
{
  double n;
  int m;
  double empirical_mise;
  //! NaN when R = 1.
  double standard_error;
  //! NaN when no exact oracle exists.
  double exact_bias_sq;
  double exact_variance;
  //! power-series only: replicate mean and SE of each coefficient.
  std::vector<double> coef_mean;
  std::vector<double> coef_se;
};

struct MiseReport
{
  std::vector<MiseRow> rows;
  //! Printed as a comment line above the CSV header.
  std::string note;
};

//! Worker count: DEMIX_THREADS if set, else hardware concurrency.
int worker_count();

//! seed ⊕ splitmix64(i).
std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t i);

//! Uniform on [0, 1) from the top 53 bits.
double uniform01(std::mt19937_64& rng);

//! Piecewise-constant majorant of f on [lo, hi] for rejection sampling.
class Envelope
{
public:
  //! 1024 cells inflated by 1.01; cells double while the expected rejection
  //! rate exceeds 99%.
  Envelope(Density f, double lo, double hi, int cells = 1024);

  //! Throws NumericalError if f exceeds the envelope at a drawn point.
  double draw(std::mt19937_64& rng) const;
  int cells() const { return static_cast<int>(height_.size()); }
  double acceptance() const { return acceptance_; }

private:
  void build(int cells);

  Density f_;
  double lo_, hi_;
  std::vector<double> height_;
  std::vector<double> cdf_;
  double acceptance_ = 0;
};

//! X ~ π_θ by inverse CDF; the search stops once the mass reaches 1 − 1e-15.
std::int64_t draw_mixand(const PowerSeriesFamily& family, double theta, std::mt19937_64& rng);

//! Inverse CDF on a finite integer pmf.
std::int64_t draw_pmf(const IntegerPmf& p, std::mt19937_64& rng);

//! n draws of X for the power-series or uniform scenario.
EmpiricalCounts sample_dataset(const SimConfig& config, double n, std::uint64_t seed);
//! n draws of Y = θ + ε for the deconv scenario.
IntegerCounts sample_deconv_dataset(const SimConfig& config, double n, std::uint64_t seed);

//! m for sample size n under the config's rule.
int resolve_m(const SimConfig& config, double n);

//! ‖f̂ − f‖²_H over the basis rule (256-node Gauss-Legendre on [a, b]).
double l2_dist(const Estimate& estimate, const Density& f);
//! Σ_k (f̂(k) − f(k))² with f̂ = 0 off the given range.
double l2_dist(const std::vector<double>& estimate, std::int64_t first, const IntegerPmf& f);

MiseReport empirical_mise(const SimConfig& config);

struct RateRow
{
  double n;
  double empirical_mise;
  double normalized;
  double normalized_se;
};

struct RateTable
{
  std::vector<RateRow> rows;
  //! Fraction of consecutive cells where the raw MISE decreases.
  double decrease_fraction;
};

RateTable rate_table(const MiseReport& report, const std::function<double(double)>& rate);

//! Every consecutive pair satisfies mise_{i+1} < mise_i + 3 √(se_i² + se_{i+1}²)
//! and the last cell is below the first.
bool decreasing_within_se(const MiseReport& report);

//! CSV with header and 17 significant digits; NaN cells print as NA.
std::string report_csv(const MiseReport& report);

} // namespace demix
