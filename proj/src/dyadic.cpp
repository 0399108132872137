#include "fbmbt/dyadic.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "fbmbt/rng.hpp"

namespace fbmbt {

double DyadicLevel::spacing() const { return std::exp2(-0.5 * n); }

std::size_t horizon_steps(int n, double t) {
  if (n < 0) throw std::invalid_argument("dyadic level must satisfy n >= 0");
  if (!(t >= 0.0)) throw std::invalid_argument("horizon t must be >= 0");
  const double k = std::floor(std::exp2(double(n)) * t);
  if (k > 0x1p62) throw std::invalid_argument("horizon floor(2^n t) overflows");
  return std::size_t(k);
}

DyadicWalk simulate_walk(DyadicLevel level, std::size_t num_steps,
                         std::uint64_t seed) {
  if (level.n < 0)
    throw std::invalid_argument("dyadic level must satisfy n >= 0");
  DyadicWalk walk{level, seed, {}};
  walk.steps.reserve(num_steps + 1);
  walk.steps.push_back(0);
  Rng rng = Rng::substream(seed, {stream_tag::walk});
  std::int32_t pos = 0;
  std::uint64_t bits = 0;
  for (std::size_t k = 0; k < num_steps; ++k) {
    if (k % 64 == 0) bits = rng.next_u64();
    pos += (bits & 1) ? 1 : -1;
    bits >>= 1;
    walk.steps.push_back(pos);
  }
  return walk;
}

std::uint32_t CrossingCounts::up_at(std::int64_t j) const {
  if (j < cell_min || j >= cell_end()) return 0;
  return up[std::size_t(j - cell_min)];
}

std::uint32_t CrossingCounts::down_at(std::int64_t j) const {
  if (j < cell_min || j >= cell_end()) return 0;
  return down[std::size_t(j - cell_min)];
}

CrossingCounts count_crossings(const DyadicWalk& walk, std::size_t horizon) {
  if (horizon > walk.num_steps()) {
    std::ostringstream msg;
    msg << "count_crossings: horizon " << horizon << " exceeds the walk's "
        << walk.num_steps() << " steps";
    throw std::invalid_argument(msg.str());
  }
  CrossingCounts counts{walk.level, horizon, 0, {}, {}};
  if (horizon == 0) return counts;

  const auto [lo_it, hi_it] =
      std::minmax_element(walk.steps.begin(),
                          walk.steps.begin() + std::ptrdiff_t(horizon) + 1);
  counts.cell_min = *lo_it;
  const std::size_t cells = std::size_t(*hi_it - *lo_it);
  counts.up.assign(cells, 0);
  counts.down.assign(cells, 0);
  for (std::size_t k = 0; k < horizon; ++k) {
    const std::int32_t a = walk.steps[k];
    const std::int32_t b = walk.steps[k + 1];
    const std::size_t cell = std::size_t(std::min(a, b) - counts.cell_min);
    if (b > a) {
      ++counts.up[cell];
    } else {
      ++counts.down[cell];
    }
  }
  return counts;
}

std::int64_t endpoint_index(const DyadicWalk& walk, double t) {
  const std::size_t k = horizon_steps(walk.level.n, t);
  if (k > walk.num_steps()) {
    std::ostringstream msg;
    msg << "endpoint_index: floor(2^" << walk.level.n << " * " << t << ") = "
        << k << " exceeds the walk's " << walk.num_steps() << " steps";
    throw std::invalid_argument(msg.str());
  }
  return walk.steps[k];
}

LocalTimeProfile walk_local_time(const CrossingCounts& counts) {
  const double delta = counts.level.spacing();
  LocalTimeProfile profile{{}, {}, double(counts.horizon) *
                                       std::exp2(-double(counts.level.n))};
  profile.x.reserve(counts.up.size());
  profile.value.reserve(counts.up.size());
  for (std::size_t i = 0; i < counts.up.size(); ++i) {
    profile.x.push_back(double(counts.cell_min + std::int64_t(i)) * delta);
    profile.value.push_back(delta *
                            (double(counts.up[i]) + double(counts.down[i])));
  }
  return profile;
}

BrownianPath simulate_brownian(double horizon, double mesh,
                               std::uint64_t seed) {
  if (!(horizon > 0.0))
    throw std::invalid_argument("simulate_brownian: horizon must be > 0");
  if (!(mesh > 0.0))
    throw std::invalid_argument("simulate_brownian: mesh must be > 0");
  const double steps = std::ceil(horizon / mesh);
  if (steps > 0x1p31)
    throw std::invalid_argument("simulate_brownian: mesh too fine to store");
  const std::size_t n = std::size_t(steps);
  BrownianPath path{horizon, mesh, seed, std::vector<double>(n + 1)};
  Rng rng = Rng::substream(seed, {stream_tag::brownian});
  rng.fill_gaussian({path.values.data() + 1, n});
  const double scale = std::sqrt(mesh);
  path.values[0] = 0.0;
  for (std::size_t k = 1; k <= n; ++k)
    path.values[k] = path.values[k - 1] + scale * path.values[k];
  return path;
}

LocalTimeProfile occupation_local_time(const BrownianPath& path,
                                       std::span<const double> x_grid,
                                       double bandwidth) {
  if (!(bandwidth > 0.0))
    throw std::invalid_argument("occupation_local_time: bandwidth must be > 0");
  for (std::size_t i = 1; i < x_grid.size(); ++i)
    if (!(x_grid[i - 1] < x_grid[i]))
      throw std::invalid_argument(
          "occupation_local_time: x_grid must be strictly increasing");

  std::vector<std::uint64_t> hits(x_grid.size(), 0);
  const double half = 0.5 * bandwidth;
  for (std::size_t k = 1; k < path.values.size(); ++k) {
    const double w = path.values[k];
    auto lo = std::lower_bound(x_grid.begin(), x_grid.end(), w - half);
    auto hi = std::upper_bound(lo, x_grid.end(), w + half);
    for (auto it = lo; it != hi; ++it) ++hits[std::size_t(it - x_grid.begin())];
  }
  const double n_samples = double(path.values.size() - 1);
  LocalTimeProfile profile{{x_grid.begin(), x_grid.end()},
                           std::vector<double>(x_grid.size()),
                           n_samples * path.mesh};
  const double scale = path.mesh / bandwidth;
  for (std::size_t i = 0; i < hits.size(); ++i)
    profile.value[i] = double(hits[i]) * scale;
  return profile;
}

namespace {

// Symmetric growable counter array indexed by signed grid index.
class OffsetCounts {
 public:
  void bump(std::int64_t idx) {
    if (counts_.empty()) {
      lo_ = idx - 16;
      counts_.assign(33, 0);
    } else if (idx < lo_) {
      const std::int64_t new_lo = idx - std::int64_t(counts_.size());
      counts_.insert(counts_.begin(), std::size_t(lo_ - new_lo), 0);
      lo_ = new_lo;
    } else if (idx >= lo_ + std::int64_t(counts_.size())) {
      counts_.resize(std::size_t(idx - lo_) + std::size_t(counts_.size()) + 1,
                     0);
    }
    ++counts_[std::size_t(idx - lo_)];
  }
  std::int64_t lo() const { return lo_; }
  const std::vector<std::uint64_t>& counts() const { return counts_; }

 private:
  std::int64_t lo_ = 0;
  std::vector<std::uint64_t> counts_;
};

}  // namespace

CoupledCrossings coupled_crossings(std::span<const int> levels, double t,
                                   double mesh, double bandwidth_factor,
                                   std::uint64_t seed) {
  if (levels.empty())
    throw std::invalid_argument("coupled_crossings: need at least one level");
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (levels[i] < 0)
      throw std::invalid_argument("coupled_crossings: levels must be >= 0");
    if (i > 0) {
      if (levels[i] <= levels[i - 1])
        throw std::invalid_argument(
            "coupled_crossings: levels must be strictly increasing");
      if ((levels[i] - levels[i - 1]) % 2 != 0)
        throw std::invalid_argument(
            "coupled_crossings: level differences must be even so the grids "
            "nest");
    }
  }
  if (!(t > 0.0)) throw std::invalid_argument("coupled_crossings: t must be > 0");
  if (!(mesh > 0.0))
    throw std::invalid_argument("coupled_crossings: mesh must be > 0");
  if (!(bandwidth_factor > 0.0))
    throw std::invalid_argument(
        "coupled_crossings: bandwidth_factor must be > 0");

  const int n_fine = levels.back();
  const double delta = DyadicLevel{n_fine}.spacing();
  const double eps = bandwidth_factor * std::sqrt(mesh);
  if (!(eps < delta))
    throw std::invalid_argument(
        "coupled_crossings: bandwidth must stay below the finest spacing "
        "(refine the mesh)");

  const std::size_t n_levels = levels.size();
  std::vector<std::int64_t> ratio(n_levels);
  std::vector<std::size_t> needed(n_levels);
  CoupledCrossings out;
  out.walks.reserve(n_levels);
  for (std::size_t i = 0; i < n_levels; ++i) {
    ratio[i] = std::int64_t(1) << ((n_fine - levels[i]) / 2);
    needed[i] = horizon_steps(levels[i], t);
    DyadicWalk walk{DyadicLevel{levels[i]}, seed, {}};
    walk.steps.reserve(needed[i] + 1);
    walk.steps.push_back(0);
    out.walks.push_back(std::move(walk));
  }

  Rng rng = Rng::substream(seed, {stream_tag::coupled});
  const double sqrt_mesh = std::sqrt(mesh);
  const double inv_delta = 1.0 / delta;
  const double half_eps = 0.5 * eps;
  const std::size_t occ_samples = std::size_t(std::floor(t / mesh));
  OffsetCounts bins;

  std::size_t unfilled = 0;
  for (std::size_t i = 0; i < n_levels; ++i)
    if (needed[i] > 0) ++unfilled;

  std::vector<std::int64_t> cur(n_levels, 0);
  std::int64_t cur_fine = 0;
  double w = 0.0;
  std::size_t k = 0;
  const std::size_t budget =
      64 * std::max<std::size_t>(occ_samples, 1) + (1u << 20);

  auto record_fine_step = [&](std::int64_t pos) {
    for (std::size_t i = 0; i < n_levels; ++i) {
      auto& steps = out.walks[i].steps;
      if (steps.size() > needed[i]) continue;  // already full
      if (pos % ratio[i] != 0) continue;
      const std::int64_t coarse = pos / ratio[i];
      if (coarse == cur[i]) continue;
      cur[i] = coarse;
      steps.push_back(std::int32_t(coarse));
      if (steps.size() == needed[i] + 1) --unfilled;
    }
  };

  while (unfilled > 0 || k < occ_samples) {
    if (++k > budget)
      throw std::runtime_error("coupled_crossings: path budget exhausted");
    w += sqrt_mesh * rng.gaussian();
    if (k <= occ_samples) {
      const auto idx = std::int64_t(std::llround(w * inv_delta));
      if (std::abs(w - double(idx) * delta) <= half_eps) bins.bump(idx);
    }
    while (w >= double(cur_fine + 1) * delta) record_fine_step(++cur_fine);
    while (w <= double(cur_fine - 1) * delta) record_fine_step(--cur_fine);
  }

  out.simulated_time = double(k) * mesh;
  const auto& counts = bins.counts();
  std::size_t lo = 0, hi = counts.size();
  while (lo < hi && counts[lo] == 0) ++lo;
  while (hi > lo && counts[hi - 1] == 0) --hi;
  LocalTimeProfile occ{{}, {}, double(occ_samples) * mesh};
  occ.x.reserve(hi - lo);
  occ.value.reserve(hi - lo);
  const double scale = mesh / eps;
  for (std::size_t i = lo; i < hi; ++i) {
    occ.x.push_back(double(bins.lo() + std::int64_t(i)) * delta);
    occ.value.push_back(double(counts[i]) * scale);
  }
  out.occupation = std::move(occ);
  return out;
}

}  // namespace fbmbt
