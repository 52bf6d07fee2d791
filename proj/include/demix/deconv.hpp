#pragma once

#include "demix/mixands.hpp"
#include <complex>
#include <cstdint>
#include <map>

namespace demix {

//! Integer-valued data on Z (observations X + ε may be negative).
using IntegerCounts = std::map<std::int64_t, std::uint64_t>;

//! G uniform nodes λ_j = −π + 2πj/G, j = 1..G, on (−π, π].
struct FourierGrid
{
  int G = 8192;

  static FourierGrid make(int G);
  double node(int j) const;
};

//! Σ_k c(k) e^{−ikλ}.
std::complex<double> fourier_series(const std::map<std::int64_t, double>& coeffs, double lambda);
std::complex<double> fourier_series(const IntegerPmf& p, double lambda);

struct KpResult
{
  double value;
  bool divergent;
};

//! Trapezoid value of ∫ |p*|^{-2} over (−π, π]; flagged when min |p*|² < 1e-12.
KpResult Kp(const NoisePmf& p, const FourierGrid& grid = {});

//! f̂(k) = (1/2π) ∫ P*(λ)/p*(λ) e^{ikλ} dλ for kmin ≤ k ≤ kmax, where P* is
//! the transform of `freqs`. The grid grows (even) to cover twice the width
//! of data, noise and k-range supports.
std::vector<double> deconvolve(const std::map<std::int64_t, double>& freqs,
                               const NoisePmf& p,
                               std::int64_t kmin,
                               std::int64_t kmax,
                               const FourierGrid& grid = {});

std::vector<double> estimate_deconv(const IntegerCounts& counts,
                                    const NoisePmf& p,
                                    std::int64_t kmin,
                                    std::int64_t kmax,
                                    const FourierGrid& grid = {});

//! a * b on Z.
IntegerPmf convolve(const IntegerPmf& a, const IntegerPmf& b);

struct Thm4Constants
{
  double c0;
  double c1;
  //! c0/(2 c1); NaN when not identifiable.
  double asymptotic_lower;
  bool non_identifiable;
};

Thm4Constants thm4_constants(const IntegerPmf& f0, const IntegerPmf& f1, const NoisePmf& p);

//! I(w) for the two-point model (1−w) π_{f0} + w π_{f1}, 0/0 = 0.
double fisher_info(double w, const IntegerPmf& f0, const IntegerPmf& f1, const NoisePmf& p);

} // namespace demix
