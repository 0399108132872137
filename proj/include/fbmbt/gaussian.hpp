#pragma once

// Exact Gaussian building blocks: fractional Gaussian noise (fGn), fractional
// Brownian motion (fBm) on grids and at arbitrary points.
//
// Sampling is exact in law.  sample_fgn uses circulant embedding (FFT of the
// symmetrised autocovariance; eigenvalues of the fGn embedding are
// nonnegative for every H), with a dense Cholesky fallback should roundoff
// push an eigenvalue below -1e-10 relative.  fbm_at_points uses dense
// Cholesky with a single jitter retry of 1e-12 relative on the diagonal.

#include <cstdint>
#include <vector>

#include "fbmbt/rng.hpp"

namespace fbmbt {

// Hurst index, validated to (0, 1).
struct Hurst {
  double value;
  explicit Hurst(double h);
};

// Autocovariance of unit-variance fGn at integer lag k:
//   rho(k) = ((|k|+1)^{2H} + (|k|-1)^{2H} - 2|k|^{2H}) / 2.
// Evaluated through the binomial series of the second difference for
// |k| >= 2, which avoids the catastrophic cancellation of the naive form
// (relative error ~1e-15 instead of absolute error ~ulp(k^{2H})) and is an
// exact zero at H = 1/2.
double rho(Hurst h, std::int64_t k);

struct FgnDiagnostics {
  bool used_cholesky_fallback = false;
  double min_eigenvalue = 0.0;   // smallest circulant eigenvalue seen
  std::size_t embedding_size = 0;
};

// Stationary sequence G_1..G_m with autocovariance rho.  Bit-reproducible for
// fixed (h, m, seed); folds {stream_tag::fgn}.
struct FgnPath {
  Hurst hurst;
  std::uint64_t seed;
  std::vector<double> values;
};

FgnPath sample_fgn(Hurst h, std::size_t m, std::uint64_t seed,
                   FgnDiagnostics* diag = nullptr);

// fBm sampled on a uniform grid of the given step, indices [j_min, j_max].
// value_at(0) == 0 exactly.
struct FbmGrid {
  Hurst hurst;
  double step;
  std::int64_t j_min;
  std::vector<double> values;  // values[i] is X((j_min + i) * step)

  std::int64_t j_max() const {
    return j_min + std::int64_t(values.size()) - 1;
  }
  double value_at(std::int64_t j) const { return values[std::size_t(j - j_min)]; }
};

// One-sided helper: X(j*step) = step^H * (G_1 + ... + G_j), indices [0, m].
FbmGrid fbm_grid_from_fgn(const FgnPath& path, double step);

// Two-sided fBm on indices [-J, J]: one fGn sequence of length 2J re-anchored
// at the centre, so increments are stationary and X(0) = 0 exactly.
FbmGrid two_sided_fbm(Hurst h, std::int64_t half_width, double step,
                      std::uint64_t seed);

// Strictly increasing evaluation points (may span 0 and negatives).
struct PointSet {
  std::vector<double> points;
  explicit PointSet(std::vector<double> pts);
};

// Exact joint sample of two-sided fBm at the given points via dense Cholesky
// of cov(s,t) = (|s|^{2H} + |t|^{2H} - |t-s|^{2H}) / 2.  X(0) = 0; points are
// capped (default 4096; cubic cost).  Folds {stream_tag::points}.
std::vector<double> fbm_at_points(Hurst h, const PointSet& pts,
                                  std::uint64_t seed, std::size_t cap = 4096);

// fGn window indexed by grid cells j in [-origin, size - origin - 1]:
// cell(j) is the standardized fBm increment over [j*step, (j+1)*step].
struct FgnWindow {
  FgnPath path;
  std::int64_t origin;

  std::int64_t cell_begin() const { return -origin; }
  std::int64_t cell_end() const {
    return std::int64_t(path.values.size()) - origin;
  }
  double cell(std::int64_t j) const {
    return path.values[std::size_t(j + origin)];
  }
};

// Window of 2*half_width cells centred on 0; folds {stream_tag::fgn}.
FgnWindow sample_fgn_window(Hurst h, std::int64_t half_width,
                            std::uint64_t seed);

}  // namespace fbmbt
