#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "doctest.h"
#include "fbmbt/dyadic.hpp"
#include "fbmbt/gaussian.hpp"
#include "fbmbt/hermite.hpp"
#include "fbmbt/rng.hpp"
#include "fbmbt/variation.hpp"

using namespace fbmbt;

namespace {

FgnWindow window_with_cells(double c0, double c1) {
  return FgnWindow{FgnPath{Hurst(0.5), 0, {c0, c1}}, 0};
}

}  // namespace

TEST_CASE("variation scaling exponents") {
  CHECK(variation_kappa(1) == 0.25);
  CHECK(variation_kappa(3) == 0.25);
  CHECK(variation_kappa(2) == 0.75);
  CHECK(variation_kappa(6) == 0.75);
  CHECK_THROWS(variation_kappa(0));
  CHECK(variation_prefactor(2, 0) == 1.0);
  for (int n = 0; n < 12; ++n) {
    CHECK(variation_prefactor(3, n + 1) ==
          doctest::Approx(variation_prefactor(3, n) * std::exp2(-0.25))
              .epsilon(1e-14));
    CHECK(variation_prefactor(4, n + 1) ==
          doctest::Approx(variation_prefactor(4, n) * std::exp2(-0.75))
              .epsilon(1e-14));
  }
}

TEST_CASE("hermite variation on a hand walk") {
  const int n = 4;
  const double t = 3.0 / 16.0;  // horizon = 3 steps
  const DyadicWalk walk{DyadicLevel{n}, 0, {0, 1, 2, 1}};
  const double c0 = 0.83, c1 = -1.41;
  const FgnWindow window = window_with_cells(c0, c1);

  // Crossing cells along the walk: 0 (up), 1 (up), 1 (down).
  const auto even = hermite_variation_direct(2, t, window, walk);
  CHECK(even.level == n);
  CHECK(even.order == 2);
  CHECK(even.t == t);
  CHECK(even.hurst == 0.5);
  const double h2_c0 = c0 * c0 - 1.0, h2_c1 = c1 * c1 - 1.0;
  CHECK(even.value ==
        doctest::Approx(std::exp2(-3.0) * (h2_c0 + 2.0 * h2_c1)).epsilon(1e-14));

  const auto odd = hermite_variation_direct(1, t, window, walk);
  CHECK(odd.value == doctest::Approx(0.5 * c0).epsilon(1e-14));

  // Separated evaluation over tallies gives the same numbers.
  const auto counts = count_crossings(walk, 3);
  CHECK(hermite_variation_separated(2, t, window, counts).value ==
        doctest::Approx(even.value).epsilon(1e-14));
  CHECK(hermite_variation_separated(1, t, window, counts).value ==
        doctest::Approx(odd.value).epsilon(1e-14));

  // Power sums with matching order coincide with the Hermite statistics.
  CHECK(power_variation_odd(1, t, window, walk).value == odd.value);
  CHECK(power_variation_even(1, t, window, walk).value ==
        doctest::Approx(even.value).epsilon(1e-14));

  // Zero horizon gives the zero statistic.
  CHECK(hermite_variation_direct(3, 0.0, window, walk).value == 0.0);
  CHECK(power_variation_even(2, 0.0, window, walk).value == 0.0);
  CHECK(hermite_variation_separated(1, 0.0, window,
                                    count_crossings(walk, 0)).value == 0.0);
}

TEST_CASE("a flat scenery turns the even power sum into a counter") {
  const int n = 6;
  const DyadicWalk walk{DyadicLevel{n}, 0, {0, 1, 0, 1, 0}};
  const FgnWindow window{FgnPath{Hurst(0.5), 0, {0.0, 0.0, 0.0, 0.0}}, 2};
  const double t = 4.0 * std::exp2(-double(n));
  const auto stat = power_variation_even(1, t, window, walk);
  CHECK(stat.value ==
        doctest::Approx(-4.0 * std::exp2(-0.75 * n)).epsilon(1e-14));
  // The odd power sum telescopes the walk's endpoint, which is back at 0.
  CHECK(power_variation_odd(1, t, window, walk).value == 0.0);
}

TEST_CASE("uncovered cells and horizon mismatches are reported") {
  const DyadicWalk walk{DyadicLevel{4}, 0, {0, 1, 2, 1}};
  const FgnWindow narrow{FgnPath{Hurst(0.5), 0, {0.7}}, 0};  // covers [0, 1)
  const double t = 3.0 / 16.0;
  try {
    hermite_variation_direct(2, t, narrow, walk);
    CHECK(false);
  } catch (const std::invalid_argument& err) {
    const std::string what = err.what();
    CHECK(what.find("walk visits cell") != std::string::npos);
  }

  // Tallies taken over the wrong horizon are rejected.
  const FgnWindow wide = window_with_cells(0.7, -0.2);
  CHECK_THROWS(hermite_variation_separated(2, t, wide,
                                           count_crossings(walk, 2)));
  // A walk shorter than the horizon is rejected.
  CHECK_THROWS(hermite_variation_direct(2, 1.0, wide, walk));
  CHECK_THROWS(hermite_variation_direct(0, t, wide, walk));
  CHECK_THROWS(power_variation_odd(0, t, wide, walk));
}

TEST_CASE("direct and separated evaluations agree on random instances") {
  Rng rng(2024);
  double worst = 0.0;
  for (int instance = 0; instance < 120; ++instance) {
    const int n = int(rng.next_u64() % 13);
    const std::size_t steps = 1 + std::size_t(rng.next_u64() % 4096);
    const int order = 1 + int(rng.next_u64() % 6);
    const Hurst h(0.05 + 0.9 * rng.uniform_open());
    const double t = double(steps) * std::exp2(-double(n));

    const auto walk =
        simulate_walk(DyadicLevel{n}, steps, 0xF00D + std::uint64_t(instance));
    const auto window = window_for_walk(h, walk, 0xBEEF + std::uint64_t(instance));
    const auto counts = count_crossings(walk, steps);

    const double direct = hermite_variation_direct(order, t, window, walk).value;
    const double separated =
        hermite_variation_separated(order, t, window, counts).value;
    const double scale = std::max(1.0, std::abs(direct));
    worst = std::max(worst, std::abs(direct - separated) / scale);
  }
  INFO("worst relative gap = ", worst);
  CHECK(worst <= 1e-9);
}

TEST_CASE("power sums decompose over Hermite statistics pathwise") {
  Rng rng(515);
  double worst_odd = 0.0, worst_even = 0.0;
  for (int instance = 0; instance < 60; ++instance) {
    const int n = int(rng.next_u64() % 11);
    const std::size_t steps = 1 + std::size_t(rng.next_u64() % 2048);
    const int r = 1 + int(rng.next_u64() % 6);
    const Hurst h(0.05 + 0.9 * rng.uniform_open());
    const double t = double(steps) * std::exp2(-double(n));
    const auto walk =
        simulate_walk(DyadicLevel{n}, steps, 0xACE + std::uint64_t(instance));
    const auto window =
        window_for_walk(h, walk, 0xCAFE + std::uint64_t(instance));

    const double odd = power_variation_odd(r, t, window, walk).value;
    CompensatedSum odd_sum;
    for (int k = 1; k <= r; ++k)
      odd_sum.add(odd_power_coeff(r, k) *
                  hermite_variation_direct(2 * k - 1, t, window, walk).value);
    worst_odd = std::max(worst_odd, std::abs(odd - odd_sum.value()) /
                                        std::max(1.0, std::abs(odd)));

    const double even = power_variation_even(r, t, window, walk).value;
    CompensatedSum even_sum;
    for (int k = 1; k <= r; ++k)
      even_sum.add(even_power_coeff(r, k) *
                   hermite_variation_direct(2 * k, t, window, walk).value);
    worst_even = std::max(worst_even, std::abs(even - even_sum.value()) /
                                          std::max(1.0, std::abs(even)));
  }
  INFO("worst odd gap = ", worst_odd, ", worst even gap = ", worst_even);
  CHECK(worst_odd <= 1e-9);
  CHECK(worst_even <= 1e-9);
}

TEST_CASE("odd statistics are centred") {
  const int n = 8, order = 3;
  const Hurst h(0.7);
  const std::size_t steps = 256, reps = 400;
  const double t = 1.0;
  CompensatedSum sum, sq;
  for (std::size_t rep = 0; rep < reps; ++rep) {
    const auto walk = simulate_walk(DyadicLevel{n}, steps, 10000 + rep);
    const auto window = window_for_walk(h, walk, 20000 + rep);
    const double v = hermite_variation_direct(order, t, window, walk).value;
    sum.add(v);
    sq.add(v * v);
  }
  const double mean = sum.value() / double(reps);
  const double var = sq.value() / double(reps) - mean * mean;
  CHECK(std::abs(mean) <= 3.5 * std::sqrt(var / double(reps)));
}

TEST_CASE("dyadic-time power sums: validation and stream contract") {
  const Hurst h(0.35);
  CHECK_THROWS(dyadic_time_variation(0, 6, 1.0, h, 1));
  const auto empty = dyadic_time_variation(2, 6, 0.0, h, 1);
  CHECK(empty.raw == 0.0);
  CHECK(empty.normalized == 0.0);
  // More dyadic times than the point-set cap permits.
  CHECK_THROWS(dyadic_time_variation(2, 8, 1.0, h, 5, 16));

  // p = 1 telescopes to the composite path's endpoint, which we rebuild from
  // the documented seed layout: inner positions from the dyadic_y stream,
  // outer values at those positions from the dyadic_x stream.
  const int n = 6;
  const std::uint64_t seed = 99;
  const std::size_t horizon = horizon_steps(n, 1.0);
  std::vector<double> y(horizon + 1, 0.0);
  Rng rng = Rng::substream(seed, {stream_tag::dyadic_y});
  rng.fill_gaussian({y.data() + 1, horizon});
  for (std::size_t k = 1; k <= horizon; ++k)
    y[k] = y[k - 1] + std::exp2(-0.5 * n) * y[k];
  std::vector<double> sorted(y);
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  const auto x =
      fbm_at_points(h, PointSet{sorted}, fold_seed(seed, stream_tag::dyadic_x));
  const auto at = [&](double point) {
    return x[std::size_t(std::lower_bound(sorted.begin(), sorted.end(), point) -
                         sorted.begin())];
  };
  const auto stat = dyadic_time_variation(1, n, 1.0, h, seed);
  CHECK(stat.raw == doctest::Approx(at(y[horizon]) - at(0.0)).epsilon(1e-12));
  // Odd center is zero, so normalized is just the rescaled raw sum.
  const double kappa = (1.0 - 2.0 * h.value) / 4.0;
  CHECK(stat.normalized ==
        doctest::Approx(std::exp2(-double(n) * kappa) * stat.raw)
            .epsilon(1e-12));
}

TEST_CASE("dyadic-time centring removes the even-power mean") {
  const Hurst h(0.6);
  const int n = 6, p = 2;
  const std::size_t reps = 300;
  CompensatedSum sum, sq;
  for (std::size_t rep = 0; rep < reps; ++rep) {
    const auto stat = dyadic_time_variation(p, n, 1.0, h, 40000 + rep);
    sum.add(stat.normalized);
    sq.add(stat.normalized * stat.normalized);
  }
  const double mean = sum.value() / double(reps);
  const double var = sq.value() / double(reps) - mean * mean;
  CHECK(std::abs(mean) <= 3.5 * std::sqrt(var / double(reps)));
}

TEST_CASE("dyadic-time quadratic sum matches its conditional mean") {
  // For H = 1/2 each squared increment has conditional mean |dY| (the
  // two-sided Wiener process has E[(X(b)-X(a))^2] = |b-a| even across the
  // origin, since the wings are independent), so given the inner path
  //   E[sum | Y] = sum_k |dY_k|,   E[sum] = 2^{n/2} sqrt(2/pi) t,
  // and by Isserlis Var(sum | Y) = 2 sum_{j,k} Cov(dX_j, dX_k | Y)^2 where
  // the covariance is the signed same-sign overlap of the spatial intervals.
  // Both checks below are 3.5-sigma bounds with those exact moments.
  const Hurst h(0.5);
  const int n = 8;
  const std::size_t reps = 100;
  const std::size_t horizon = horizon_steps(n, 1.0);
  CompensatedSum raw_sum, oracle_sum, condvar_sum;
  for (std::size_t rep = 0; rep < reps; ++rep) {
    const std::uint64_t seed = 70000 + rep;
    raw_sum.add(dyadic_time_variation(2, n, 1.0, h, seed).raw);

    // Rebuild the inner positions from the documented stream.
    std::vector<double> g(horizon);
    Rng rng = Rng::substream(seed, {stream_tag::dyadic_y});
    rng.fill_gaussian(g);
    std::vector<double> y(horizon + 1, 0.0);
    for (std::size_t k = 0; k < horizon; ++k)
      y[k + 1] = y[k] + std::exp2(-0.5 * n) * g[k];

    CompensatedSum abs_dy, condvar;
    for (std::size_t k = 0; k < horizon; ++k) abs_dy.add(std::abs(y[k + 1] - y[k]));
    for (std::size_t j = 0; j < horizon; ++j) {
      const double a0 = std::min(y[j], y[j + 1]), a1 = std::max(y[j], y[j + 1]);
      const double sign_j = y[j + 1] >= y[j] ? 1.0 : -1.0;
      for (std::size_t k = 0; k < horizon; ++k) {
        const double lo = std::max(a0, std::min(y[k], y[k + 1]));
        const double hi = std::min(a1, std::max(y[k], y[k + 1]));
        if (hi <= lo) continue;
        const double pos = std::max(0.0, hi - std::max(lo, 0.0));
        const double neg = std::max(0.0, std::min(hi, 0.0) - lo);
        const double cov =
            sign_j * (y[k + 1] >= y[k] ? 1.0 : -1.0) * (pos + neg);
        condvar.add(2.0 * cov * cov);
      }
    }
    oracle_sum.add(abs_dy.value());
    condvar_sum.add(condvar.value());
  }
  const double mean = raw_sum.value() / double(reps);
  const double oracle = oracle_sum.value() / double(reps);
  const double target = std::exp2(0.5 * n) * std::sqrt(2.0 / std::acos(-1.0));
  // (a) the rebuilt conditional mean agrees with the closed form; its exact
  // per-replicate variance is 2^n Var(2^{-n/2}|N|) = 1 - 2/pi.
  const double se_oracle =
      std::sqrt((1.0 - 2.0 / std::acos(-1.0)) / double(reps));
  // (b) the realized sums agree with their conditional means; the exact
  // conditional variance comes from the overlap formula above.
  const double se_gap = std::sqrt(condvar_sum.value()) / double(reps);
  INFO("mean = ", mean, " oracle = ", oracle, " closed form = ", target,
       " se_oracle = ", se_oracle, " se_gap = ", se_gap);
  CHECK(std::abs(oracle - target) <= 3.5 * se_oracle);
  CHECK(std::abs(mean - oracle) <= 3.5 * se_gap);
}
