#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "fbmbt/dyadic.hpp"
#include "fbmbt/rng.hpp"

using fbmbt::BrownianPath;
using fbmbt::CompensatedSum;
using fbmbt::CoupledCrossings;
using fbmbt::CrossingCounts;
using fbmbt::DyadicLevel;
using fbmbt::DyadicWalk;
using fbmbt::LocalTimeProfile;
using fbmbt::Rng;
using fbmbt::count_crossings;
using fbmbt::coupled_crossings;
using fbmbt::endpoint_index;
using fbmbt::horizon_steps;
using fbmbt::occupation_local_time;
using fbmbt::simulate_brownian;
using fbmbt::simulate_walk;
using fbmbt::walk_local_time;

TEST_CASE("horizon_steps floors 2^n t") {
  CHECK(horizon_steps(4, 1.0) == 16);
  CHECK(horizon_steps(4, 0.3) == 4);  // floor(4.8)
  CHECK(horizon_steps(0, 2.5) == 2);
  CHECK(horizon_steps(10, 0.0) == 0);
  CHECK_THROWS(horizon_steps(-1, 1.0));
  CHECK_THROWS(horizon_steps(4, -0.5));
}

TEST_CASE("simulate_walk produces a fair unit-step walk from zero") {
  const auto walk = simulate_walk(DyadicLevel{6}, 512, 99);
  REQUIRE(walk.steps.size() == 513);
  CHECK(walk.steps[0] == 0);
  for (std::size_t k = 1; k < walk.steps.size(); ++k)
    CHECK(std::abs(walk.steps[k] - walk.steps[k - 1]) == 1);
  CHECK(simulate_walk(DyadicLevel{6}, 512, 99).steps == walk.steps);

  // Fairness: endpoint mean over replicates is ~N(0, K).
  CompensatedSum sum;
  const std::size_t reps = 4000, steps = 256;
  for (std::size_t rep = 0; rep < reps; ++rep)
    sum.add(double(simulate_walk(DyadicLevel{6}, steps, rep).steps.back()));
  const double mean = sum.value() / double(reps);
  CHECK(std::abs(mean) <= 4.0 * std::sqrt(double(steps) / double(reps)));
}

TEST_CASE("count_crossings hand enumerations") {
  const DyadicWalk up_down{DyadicLevel{4}, 0, {0, 1, 2, 1}};
  const auto counts = count_crossings(up_down, 3);
  CHECK(counts.horizon == 3);
  CHECK(counts.up_at(0) == 1);
  CHECK(counts.down_at(0) == 0);
  CHECK(counts.up_at(1) == 1);
  CHECK(counts.down_at(1) == 1);
  CHECK(endpoint_index(up_down, 3.0 / 16.0) == 1);

  const DyadicWalk dip{DyadicLevel{4}, 0, {0, -1, 0}};
  const auto dip_counts = count_crossings(dip, 2);
  CHECK(dip_counts.up_at(-1) == 1);
  CHECK(dip_counts.down_at(-1) == 1);
  CHECK(dip_counts.up_at(-1) == dip_counts.down_at(-1));

  const auto empty = count_crossings(up_down, 0);
  std::uint64_t total = 0;
  for (std::int64_t j = empty.cell_min; j < empty.cell_end(); ++j)
    total += empty.up_at(j) + empty.down_at(j);
  CHECK(total == 0);

  CHECK_THROWS(count_crossings(up_down, 4));  // horizon exceeds walk length
}

TEST_CASE("tallies conserve the horizon and match the endpoint indicator") {
  // U - D is +1 on cells 0 <= j < s_K, -1 on s_K <= j < 0, 0 elsewhere.
  Rng rng(314);
  for (int instance = 0; instance < 10000; ++instance) {
    const int n = int(rng.next_u64() % 21);
    const std::size_t steps = 1 + std::size_t(rng.next_u64() % 512);
    const auto walk = simulate_walk(DyadicLevel{n}, steps,
                                    0xABC000 + std::uint64_t(instance));
    const auto counts = count_crossings(walk, steps);
    const std::int64_t end = walk.steps[steps];

    std::uint64_t total = 0;
    bool indicator_ok = true;
    for (std::int64_t j = counts.cell_min; j < counts.cell_end(); ++j) {
      total += counts.up_at(j) + counts.down_at(j);
      const std::int64_t net =
          std::int64_t(counts.up_at(j)) - std::int64_t(counts.down_at(j));
      std::int64_t want = 0;
      if (j >= 0 && j < end) want = 1;
      if (j >= end && j < 0) want = -1;
      indicator_ok = indicator_ok && (net == want);
    }
    CHECK(total == steps);
    CHECK(indicator_ok);
    if (total != steps || !indicator_ok) break;
  }
}

TEST_CASE("endpoint_index reads the walk position at floor(2^n t)") {
  const auto walk = simulate_walk(DyadicLevel{5}, 64, 12);
  CHECK(endpoint_index(walk, 0.0) == 0);
  CHECK(endpoint_index(walk, 2.0) == walk.steps[64]);
  CHECK_THROWS(endpoint_index(walk, 3.0));
}

TEST_CASE("walk_local_time scales tallies by the grid spacing") {
  const int n = 6;
  const DyadicWalk zig{DyadicLevel{n}, 0, {0, 1, 0, 1}};
  const auto profile = walk_local_time(count_crossings(zig, 3));
  const double spacing = std::exp2(-0.5 * n);
  REQUIRE(profile.x.size() == profile.value.size());
  // Single occupied cell j=0: U_0 = 2, D_0 = 1.
  bool found = false;
  for (std::size_t i = 0; i < profile.x.size(); ++i) {
    if (profile.x[i] == 0.0) {
      CHECK(profile.value[i] == doctest::Approx(3.0 * spacing).epsilon(1e-15));
      found = true;
    }
  }
  CHECK(found);

  // Mass identity: sum_j L_j * spacing = K * 2^{-n}, exactly in exact
  // arithmetic, to roundoff here.
  const auto walk = simulate_walk(DyadicLevel{8}, 1000, 5);
  const auto big = walk_local_time(count_crossings(walk, 1000));
  CompensatedSum mass;
  for (double v : big.value) mass.add(v);
  const double got = mass.value() * std::exp2(-4.0);
  CHECK(got == doctest::Approx(1000.0 * std::exp2(-8.0)).epsilon(1e-12));
}

TEST_CASE("simulate_brownian meshes, moments, and quadratic variation") {
  const auto single = simulate_brownian(1.0, 1.0, 8);
  CHECK(single.values.size() == 2);
  CHECK(single.values[0] == 0.0);

  CHECK_THROWS(simulate_brownian(1.0, 0.0, 8));
  CHECK_THROWS(simulate_brownian(0.0, 0.5, 8));

  // Var(W_T) = T within 3 SE over M = 10^4.
  const std::size_t reps = 10000;
  CompensatedSum sq;
  for (std::size_t rep = 0; rep < reps; ++rep)
    sq.add(std::pow(simulate_brownian(1.0, 0.25, 100 + rep).values.back(), 2));
  const double var = sq.value() / double(reps);
  CHECK(std::abs(var - 1.0) <= 3.0 * std::sqrt(2.0 / double(reps)));

  // Quadratic variation at mesh 1e-4 is within 5% of T.
  const auto fine = simulate_brownian(1.0, 1e-4, 9);
  CompensatedSum qv;
  for (std::size_t k = 1; k < fine.values.size(); ++k)
    qv.add(std::pow(fine.values[k] - fine.values[k - 1], 2));
  CHECK(std::abs(qv.value() - 1.0) <= 0.05);
}

TEST_CASE("occupation_local_time satisfies the occupation identity") {
  const double mesh = 0x1p-16;
  const auto path = simulate_brownian(1.0, mesh, 21);
  const double bandwidth = 10.0 * std::sqrt(mesh);
  const auto [lo, hi] = std::minmax_element(path.values.begin(),
                                            path.values.end());
  std::vector<double> grid;
  const double span_lo = *lo - 2.0 * bandwidth, span_hi = *hi + 2.0 * bandwidth;
  const double dx = bandwidth / 8.0;
  for (double x = span_lo; x <= span_hi; x += dx) grid.push_back(x);
  const auto profile = occupation_local_time(path, grid, bandwidth);

  CompensatedSum integral;  // trapezoid
  for (std::size_t i = 1; i < profile.value.size(); ++i)
    integral.add(0.5 * (profile.value[i] + profile.value[i - 1]) * dx);
  CHECK(std::abs(integral.value() - 1.0) <= 0.01);
  for (double v : profile.value) CHECK(v >= 0.0);

  CHECK_THROWS(occupation_local_time(path, grid, 0.0));
  std::vector<double> bad_grid{1.0, 0.0};
  CHECK_THROWS(occupation_local_time(path, bad_grid, bandwidth));
}

TEST_CASE("occupation estimate at the origin averages to E|N| with decay") {
  const double mesh = 0x1p-14;
  const double bandwidth = 10.0 * std::sqrt(mesh);
  const std::vector<double> grid{-3.0, 0.0, 3.0};
  const std::size_t reps = 2000;
  CompensatedSum at_zero, at_tails;
  for (std::size_t rep = 0; rep < reps; ++rep) {
    const auto path = simulate_brownian(1.0, mesh, 600000 + rep);
    const auto profile = occupation_local_time(path, grid, bandwidth);
    at_zero.add(profile.value[1]);
    at_tails.add(0.5 * (profile.value[0] + profile.value[2]));
  }
  const double mean_zero = at_zero.value() / double(reps);
  const double mean_tail = at_tails.value() / double(reps);
  const double target = std::sqrt(2.0 / std::acos(-1.0));
  INFO("E[L(0)] = ", mean_zero, " target = ", target);
  CHECK(std::abs(mean_zero - target) <= 0.05 * target);
  CHECK(mean_tail < mean_zero / 3.0);
}

TEST_CASE("coupled_crossings validates its configuration") {
  const std::vector<int> levels{4, 8};
  CHECK_THROWS(coupled_crossings(std::vector<int>{8, 4}, 0.5, 0x1p-18, 10.0, 1));
  CHECK_THROWS(coupled_crossings(std::vector<int>{4, 7}, 0.5, 0x1p-18, 10.0, 1));
  CHECK_THROWS(coupled_crossings(levels, 0.0, 0x1p-18, 10.0, 1));
  // Bandwidth wider than the finest spacing cannot resolve the grid.
  CHECK_THROWS(coupled_crossings(levels, 0.5, 0x1p-6, 10.0, 1));
}

TEST_CASE("coupled_crossings extracts nested walks and a consistent profile") {
  const std::vector<int> levels{4, 10};
  const double t = 0.5, mesh = 0x1p-20;
  const CoupledCrossings coupled = coupled_crossings(levels, t, mesh, 10.0, 77);
  REQUIRE(coupled.walks.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    const auto& walk = coupled.walks[i];
    CHECK(walk.level.n == levels[i]);
    CHECK(walk.steps[0] == 0);
    CHECK(walk.num_steps() >= horizon_steps(levels[i], t));
    bool unit_steps = true;
    for (std::size_t k = 1; k < walk.steps.size(); ++k)
      unit_steps = unit_steps && std::abs(walk.steps[k] - walk.steps[k - 1]) == 1;
    CHECK(unit_steps);
  }
  CHECK(coupled.simulated_time >= t - mesh);

  // The coarse walk is the decimation of the fine walk: fine positions on the
  // coarse grid (index multiple of 2^{(n_f - n_c)/2}) with repeats collapsed.
  const std::int32_t ratio = 1 << ((levels[1] - levels[0]) / 2);
  std::vector<std::int32_t> decimated{0};
  for (const std::int32_t pos : coupled.walks[1].steps) {
    if (pos % ratio == 0 && pos / ratio != decimated.back())
      decimated.push_back(pos / ratio);
  }
  REQUIRE(decimated.size() >= 2);
  const std::size_t overlap =
      std::min(decimated.size(), coupled.walks[0].steps.size());
  bool nested = true;
  for (std::size_t k = 0; k < overlap; ++k)
    nested = nested && decimated[k] == coupled.walks[0].steps[k];
  CHECK(nested);

  // Occupation mass over the finest grid recovers t.  The narrow-band counter
  // only sees a fraction eps/spacing of the samples, so the mass carries a
  // few-percent statistical fluctuation per path; average a few replicates.
  const double spacing = std::exp2(-0.5 * levels[1]);
  CompensatedSum mass;
  const int mass_reps = 3;
  for (int rep = 0; rep < mass_reps; ++rep) {
    const auto run = coupled_crossings(levels, t, mesh, 10.0, 500 + rep);
    for (double v : run.occupation.value) mass.add(v * spacing);
  }
  CHECK(std::abs(mass.value() / mass_reps - t) <= 0.06 * t);

  // Deterministic reruns.
  const CoupledCrossings again = coupled_crossings(levels, t, mesh, 10.0, 77);
  CHECK(again.walks[0].steps == coupled.walks[0].steps);
  CHECK(again.walks[1].steps == coupled.walks[1].steps);
  CHECK(again.occupation.value == coupled.occupation.value);
}
