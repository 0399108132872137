#pragma once

// Power-variation statistics of Z = X o Y (fBm evaluated along the Brownian
// dyadic time change), built from a walk at level n and an fGn window.
//
// The grid increment of X over cell j, standardized by 2^{nH/2}, is the fGn
// value window.cell(j); a walk step across cell j contributes
// H_r(+-cell(j)) = (+-1)^r H_r(cell(j)).  The direct form sums step by step;
// the separated form groups by cell with the up/down tallies:
//   V = 2^{-n kappa} sum_j H_r(cell(j)) * (up[j] + (-1)^r down[j]),
// kappa = 1/4 for odd r, 3/4 for even r.  Both forms are evaluated with
// compensated summation in ascending index order and agree to ~1e-12
// relative; tests pin 1e-9.

#include <cstdint>

#include "fbmbt/dyadic.hpp"
#include "fbmbt/gaussian.hpp"

namespace fbmbt {

double variation_kappa(int order);                  // 1/4 odd, 3/4 even
double variation_prefactor(int order, int level);   // 2^{-n kappa}, exact

struct VariationStatistic {
  double hurst;
  int level;
  int order;   // Hermite order r (or power for the power variations)
  double t;
  double value;
};

// V over the first floor(2^n t) steps.  Requires the window to cover every
// cell the walk visits in that horizon (throws with the needed range
// otherwise; windows are never silently resampled).
VariationStatistic hermite_variation_direct(int order, double t,
                                            const FgnWindow& window,
                                            const DyadicWalk& walk);

// Same statistic from crossing counts; counts.horizon must equal
// floor(2^n t).
VariationStatistic hermite_variation_separated(int order, double t,
                                               const FgnWindow& window,
                                               const CrossingCounts& counts);

// Raw odd power variation, order p = 2r-1:
//   2^{(-n/4)(1-(4r-2)H)} * sum_k (Z_{k+1} - Z_k)^{2r-1},
// which decomposes exactly as sum_{k=1..r} odd_power_coeff(r,k) * V^{(2k-1)}.
VariationStatistic power_variation_odd(int r, double t,
                                       const FgnWindow& window,
                                       const DyadicWalk& walk);

// Centered even power variation, order p = 2r:
//   2^{(-3n/4)(1-4rH/3)} * sum_k [ (Z_{k+1} - Z_k)^{2r} - 2^{-nrH} b_{r,0} ],
// b_{r,0} = E[N^{2r}]; decomposes as sum_{k=1..r} even_power_coeff(r,k) *
// V^{(2k)}.
VariationStatistic power_variation_even(int r, double t,
                                        const FgnWindow& window,
                                        const DyadicWalk& walk);

// Sizes a window to the walk's visited range with a 2x safety margin and
// samples it.  Folds {stream_tag::fgn}.
FgnWindow window_for_walk(Hurst h, const DyadicWalk& walk,
                          std::uint64_t seed);

// Power variation sampled at dyadic *times* k 2^{-n} (not crossing times):
// Y is a Brownian grid, X is evaluated jointly at the realized Y values
// (deduplicated, sorted) by dense Cholesky, so the number of time steps is
// capped (default 4096).  raw = sum (dZ)^p; normalized applies the
// power-variation exponent and subtracts the true increment mean
//   E[(dZ)^p] = 2^{-npH/2} E|N|^{pH} E[N^p]   (0 for odd p).
struct DyadicTimeVariation {
  int p;
  int level;
  double t;
  double raw;
  double normalized;
};
DyadicTimeVariation dyadic_time_variation(int p, int level, double t, Hurst h,
                                          std::uint64_t seed,
                                          std::size_t cap = 4096);

}  // namespace fbmbt
