#include "fbmbt/variation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "fbmbt/hermite.hpp"
#include "fbmbt/rng.hpp"

namespace fbmbt {

namespace {

// x^p for small non-negative integer p, by squaring.
double ipow(double x, int p) {
  double acc = 1.0;
  double base = x;
  for (int e = p; e > 0; e >>= 1) {
    if (e & 1) acc *= base;
    base *= base;
  }
  return acc;
}

void require_cell(const FgnWindow& window, std::int64_t j) {
  if (j < window.cell_begin() || j >= window.cell_end()) {
    std::ostringstream msg;
    msg << "fGn window covers cells [" << window.cell_begin() << ", "
        << window.cell_end() << ") but the walk visits cell " << j
        << "; enlarge the window's half width";
    throw std::invalid_argument(msg.str());
  }
}

void require_order(int order) {
  if (order < 1) throw std::invalid_argument("order must be >= 1");
}

std::size_t checked_horizon(const DyadicWalk& walk, double t) {
  const std::size_t k = horizon_steps(walk.level.n, t);
  if (k > walk.num_steps()) {
    std::ostringstream msg;
    msg << "walk has " << walk.num_steps() << " steps but horizon t = " << t
        << " needs " << k;
    throw std::invalid_argument(msg.str());
  }
  return k;
}

}  // namespace

double variation_kappa(int order) {
  require_order(order);
  return (order % 2 == 1) ? 0.25 : 0.75;
}

double variation_prefactor(int order, int level) {
  return std::exp2(-double(level) * variation_kappa(order));
}

VariationStatistic hermite_variation_direct(int order, double t,
                                            const FgnWindow& window,
                                            const DyadicWalk& walk) {
  require_order(order);
  const std::size_t horizon = checked_horizon(walk, t);
  const bool odd = (order % 2 == 1);
  CompensatedSum sum;
  for (std::size_t k = 1; k <= horizon; ++k) {
    const std::int32_t a = walk.steps[k - 1];
    const std::int32_t b = walk.steps[k];
    const std::int64_t cell = std::min(a, b);
    require_cell(window, cell);
    const double h = hermite_eval(order, window.cell(cell));
    sum.add((odd && b < a) ? -h : h);
  }
  return {window.path.hurst.value, walk.level.n, order, t,
          variation_prefactor(order, walk.level.n) * sum.value()};
}

VariationStatistic hermite_variation_separated(int order, double t,
                                               const FgnWindow& window,
                                               const CrossingCounts& counts) {
  require_order(order);
  const std::size_t expected = horizon_steps(counts.level.n, t);
  if (counts.horizon != expected) {
    std::ostringstream msg;
    msg << "crossing counts were taken over " << counts.horizon
        << " steps but horizon t = " << t << " needs " << expected;
    throw std::invalid_argument(msg.str());
  }
  const double down_sign = (order % 2 == 1) ? -1.0 : 1.0;
  CompensatedSum sum;
  for (std::size_t i = 0; i < counts.up.size(); ++i) {
    const double u = counts.up[i];
    const double d = counts.down[i];
    if (u == 0.0 && d == 0.0) continue;
    const std::int64_t cell = counts.cell_min + std::int64_t(i);
    require_cell(window, cell);
    sum.add(hermite_eval(order, window.cell(cell)) * (u + down_sign * d));
  }
  return {window.path.hurst.value, counts.level.n, order, t,
          variation_prefactor(order, counts.level.n) * sum.value()};
}

VariationStatistic power_variation_odd(int r, double t, const FgnWindow& window,
                                       const DyadicWalk& walk) {
  if (r < 1) throw std::invalid_argument("power half-order r must be >= 1");
  const int p = 2 * r - 1;
  const std::size_t horizon = checked_horizon(walk, t);
  CompensatedSum sum;
  for (std::size_t k = 1; k <= horizon; ++k) {
    const std::int32_t a = walk.steps[k - 1];
    const std::int32_t b = walk.steps[k];
    const std::int64_t cell = std::min(a, b);
    require_cell(window, cell);
    const double term = ipow(window.cell(cell), p);
    sum.add(b > a ? term : -term);
  }
  return {window.path.hurst.value, walk.level.n, p, t,
          std::exp2(-0.25 * walk.level.n) * sum.value()};
}

VariationStatistic power_variation_even(int r, double t,
                                        const FgnWindow& window,
                                        const DyadicWalk& walk) {
  if (r < 1) throw std::invalid_argument("power half-order r must be >= 1");
  const int p = 2 * r;
  const std::size_t horizon = checked_horizon(walk, t);
  const double center = gaussian_even_moment(r);
  CompensatedSum sum;
  for (std::size_t k = 1; k <= horizon; ++k) {
    const std::int64_t cell = std::min(walk.steps[k - 1], walk.steps[k]);
    require_cell(window, cell);
    sum.add(ipow(window.cell(cell), p) - center);
  }
  return {window.path.hurst.value, walk.level.n, p, t,
          std::exp2(-0.75 * walk.level.n) * sum.value()};
}

FgnWindow window_for_walk(Hurst h, const DyadicWalk& walk,
                          std::uint64_t seed) {
  std::int32_t lo = 0;
  std::int32_t hi = 0;
  for (const std::int32_t s : walk.steps) {
    lo = std::min(lo, s);
    hi = std::max(hi, s);
  }
  const std::int64_t reach = std::max<std::int64_t>(
      {std::int64_t(1), -std::int64_t(lo), std::int64_t(hi)});
  return sample_fgn_window(h, 2 * reach, seed);
}

DyadicTimeVariation dyadic_time_variation(int p, int level, double t, Hurst h,
                                          std::uint64_t seed,
                                          std::size_t cap) {
  if (p < 1) throw std::invalid_argument("power p must be >= 1");
  const std::size_t horizon = horizon_steps(level, t);
  DyadicTimeVariation result{p, level, t, 0.0, 0.0};
  if (horizon == 0) return result;

  // Brownian positions at the dyadic times k 2^{-n}.
  std::vector<double> y(horizon + 1);
  Rng rng = Rng::substream(seed, {stream_tag::dyadic_y});
  rng.fill_gaussian({y.data() + 1, horizon});
  const double scale = std::exp2(-0.5 * level);
  y[0] = 0.0;
  for (std::size_t k = 1; k <= horizon; ++k) y[k] = y[k - 1] + scale * y[k];

  std::vector<double> sorted(y);
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  const std::vector<double> x = fbm_at_points(
      h, PointSet{sorted}, fold_seed(seed, stream_tag::dyadic_x), cap);

  auto value_at = [&](double point) {
    const auto it = std::lower_bound(sorted.begin(), sorted.end(), point);
    return x[std::size_t(it - sorted.begin())];
  };

  const double center =
      (p % 2 == 1) ? 0.0
                   : std::exp2(-0.5 * level * p * h.value) *
                         gaussian_abs_moment(p * h.value) *
                         gaussian_even_moment(p / 2);
  const double kappa = (p % 2 == 1) ? (1.0 - 2.0 * p * h.value) / 4.0
                                    : (3.0 - 2.0 * p * h.value) / 4.0;
  CompensatedSum raw;
  CompensatedSum centered;
  double prev = value_at(y[0]);
  for (std::size_t k = 1; k <= horizon; ++k) {
    const double next = value_at(y[k]);
    const double term = ipow(next - prev, p);
    raw.add(term);
    centered.add(term - center);
    prev = next;
  }
  result.raw = raw.value();
  result.normalized = std::exp2(-double(level) * kappa) * centered.value();
  return result;
}

}  // namespace fbmbt
