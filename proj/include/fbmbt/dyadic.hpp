#pragma once

// The dyadic time-change layer: the +-1 walk on the level-n spatial grid
// (spacing 2^{-n/2}) induced by Brownian motion hitting successive grid
// points, its crossing counts, and local-time estimators.
//
// Walks are simulated directly as fair +-1 steps (the embedded walk of
// Brownian motion is exactly that), in integer grid indices; the irrational
// spacing for odd n only ever scales outputs.  A coupled mode extracts the
// walks of several levels from one fine Brownian path so crossing-count and
// occupation local-time estimates can be compared on the same randomness.

#include <cstdint>
#include <span>
#include <vector>

namespace fbmbt {

struct DyadicLevel {
  int n;  // >= 0
  double spacing() const;  // 2^{-n/2}
};

// Number of walk steps for horizon t at level n: floor(2^n * t).
std::size_t horizon_steps(int n, double t);

// steps[0] = 0, |steps[k+1] - steps[k]| = 1.  Folds {stream_tag::walk}.
struct DyadicWalk {
  DyadicLevel level;
  std::uint64_t seed;
  std::vector<std::int32_t> steps;

  std::size_t num_steps() const { return steps.size() - 1; }
};
DyadicWalk simulate_walk(DyadicLevel level, std::size_t num_steps,
                         std::uint64_t seed);

// Up/down transition tallies per grid cell over the first `horizon` steps:
// up[j] counts j -> j+1, down[j] counts j+1 -> j.  sum(up+down) == horizon,
// and up[j] - down[j] is the net-crossing indicator determined by the
// endpoint s_K: +1 on 0 <= j < s_K, -1 on s_K <= j < 0, else 0.
struct CrossingCounts {
  DyadicLevel level;
  std::size_t horizon;
  std::int64_t cell_min;  // first cell index stored
  std::vector<std::uint32_t> up, down;

  std::int64_t cell_end() const {
    return cell_min + std::int64_t(up.size());
  }
  std::uint32_t up_at(std::int64_t j) const;
  std::uint32_t down_at(std::int64_t j) const;
};
CrossingCounts count_crossings(const DyadicWalk& walk, std::size_t horizon);

// Walk position after floor(2^n t) steps (grid index units).
std::int64_t endpoint_index(const DyadicWalk& walk, double t);

// Local-time profile on a spatial grid; horizon is the time-length of the
// data behind it.
struct LocalTimeProfile {
  std::vector<double> x;
  std::vector<double> value;
  double horizon;
};

// Crossing-count estimate: L(j * 2^{-n/2}) = 2^{-n/2} (up[j] + down[j]).
// Its trapezoidal integral is exactly horizon * 2^{-n} minus boundary terms.
LocalTimeProfile walk_local_time(const CrossingCounts& counts);

// Brownian path W_0..W_N on a uniform mesh, N = ceil(T/mesh).  Folds
// {stream_tag::brownian}.
struct BrownianPath {
  double horizon;
  double mesh;
  std::uint64_t seed;
  std::vector<double> values;
};
BrownianPath simulate_brownian(double horizon, double mesh,
                               std::uint64_t seed);

// Top-hat occupation estimate on an increasing grid:
//   L(x) = mesh/eps * #{1 <= k <= N : |W_k - x| <= eps/2},  eps = bandwidth.
// Recommended bandwidth is c * sqrt(mesh) with c in [5, 20].
LocalTimeProfile occupation_local_time(const BrownianPath& path,
                                       std::span<const double> x_grid,
                                       double bandwidth);

// Coupled mode: one fine Brownian path drives (a) walks at each requested
// level, extracted from successive grid hits and exactly nested across
// levels, and (b) a top-hat occupation profile on the finest grid over
// [0, t].  Levels must be >= 0, strictly increasing, with even differences
// (so coarse grids are sub-grids of the finest).  Each walk carries at least
// horizon_steps(level, t) steps.  Folds {stream_tag::coupled}.
struct CoupledCrossings {
  std::vector<DyadicWalk> walks;   // one per level, same order as input
  LocalTimeProfile occupation;     // on the finest grid, horizon t
  double simulated_time;           // path length needed to fill the walks
};
CoupledCrossings coupled_crossings(std::span<const int> levels, double t,
                                   double mesh, double bandwidth_factor,
                                   std::uint64_t seed);

}  // namespace fbmbt
