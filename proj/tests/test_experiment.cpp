#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "doctest.h"
#include "fbmbt/experiment.hpp"
#include "fbmbt/limit_laws.hpp"
#include "fbmbt/rng.hpp"

using namespace fbmbt;

namespace {

ExperimentConfig base_config(ExperimentMode mode) {
  ExperimentConfig config;
  config.hurst = 0.5;
  config.levels = {6};
  config.orders = {1};
  config.times = {1.0};
  config.replicates = 120;
  config.master_seed = 9;
  config.mode = mode;
  config.workers = 1;
  return config;
}

bool has_comparison(const ExperimentReport& report, const std::string& name) {
  return std::any_of(report.comparisons.begin(), report.comparisons.end(),
                     [&](const ComparisonRow& row) { return row.name == name; });
}

std::string zeroed_json(ExperimentReport report) {
  report.wall_time_seconds = 0.0;
  return report_to_json(report);
}

}  // namespace

TEST_CASE("mode names round trip") {
  for (const auto mode :
       {ExperimentMode::theorem_odd, ExperimentMode::theorem_even,
        ExperimentMode::corollary_odd, ExperimentMode::corollary_even,
        ExperimentMode::bmrs_reference}) {
    CHECK(mode_from_string(to_string(mode)) == mode);
  }
  CHECK_THROWS_AS(mode_from_string("bogus"), std::invalid_argument);
}

TEST_CASE("configuration validation") {
  auto config = base_config(ExperimentMode::theorem_odd);

  auto broken = config;
  broken.replicates = 0;
  CHECK_THROWS_AS(run_theorem_check(broken), std::invalid_argument);

  broken = config;
  broken.times = {};
  CHECK_THROWS_AS(run_theorem_check(broken), std::invalid_argument);
  broken.times = {1.0, 0.5};
  CHECK_THROWS_AS(run_theorem_check(broken), std::invalid_argument);
  broken.times = {-1.0, 0.5};
  CHECK_THROWS_AS(run_theorem_check(broken), std::invalid_argument);

  broken = config;
  broken.levels = {};
  CHECK_THROWS_AS(run_theorem_check(broken), std::invalid_argument);
  broken.levels = {0};
  CHECK_THROWS_AS(run_theorem_check(broken), std::invalid_argument);
  broken.levels = {29};
  CHECK_THROWS_AS(run_theorem_check(broken), std::invalid_argument);

  broken = config;
  broken.orders = {0};
  CHECK_THROWS_AS(run_theorem_check(broken), std::invalid_argument);
  broken.orders = {16};
  CHECK_THROWS_AS(run_theorem_check(broken), std::invalid_argument);

  broken = config;
  broken.hurst = 1.5;
  CHECK_THROWS_AS(run_theorem_check(broken), std::invalid_argument);

  // Runners insist on a matching mode.
  auto mismatched = base_config(ExperimentMode::corollary_odd);
  CHECK_THROWS_AS(run_theorem_check(mismatched), std::invalid_argument);
  auto mismatched2 = base_config(ExperimentMode::theorem_even);
  CHECK_THROWS_AS(run_corollary_check(mismatched2), std::invalid_argument);
}

TEST_CASE("hypothesis gates and the override escape hatch") {
  auto odd = base_config(ExperimentMode::theorem_odd);
  odd.hurst = 0.6;  // odd families need H <= 1/2
  CHECK_THROWS_AS(run_theorem_check(odd), std::invalid_argument);

  auto even = base_config(ExperimentMode::theorem_even);
  even.hurst = 0.8;  // even families need H < 3/4
  CHECK_THROWS_AS(run_theorem_check(even), std::invalid_argument);
  auto coro = base_config(ExperimentMode::corollary_even);
  coro.hurst = 0.75;
  CHECK_THROWS_AS(run_corollary_check(coro), std::invalid_argument);

  // With the override the run proceeds, is labelled as a smoke run, and the
  // divergent constant is flagged with the -1 sentinel instead of a target.
  odd.override_hypotheses = true;
  const auto report = run_theorem_check(odd);
  CHECK(report.mode_label == "theorem_odd-smoke");
  REQUIRE(report.sigma2_by_order.size() == 1);
  CHECK(report.sigma2_by_order[0] == -1.0);
  CHECK(has_comparison(report, "mean-zero"));
  CHECK(has_comparison(report, "identity"));
  CHECK(!has_comparison(report, "variance"));
  CHECK(!has_comparison(report, "ks-mixture"));
  CHECK(!has_comparison(report, "degenerate-limit"));
  REQUIRE(!report.stats.empty());
  CHECK(!report.stats[0].ks.has_value());
}

TEST_CASE("vanishing limit variance is reported as degenerate, not failed") {
  // At H < 1/2 the order-1 constant telescopes to zero.
  auto config = base_config(ExperimentMode::theorem_odd);
  config.hurst = 0.35;
  const auto report = run_theorem_check(config);
  CHECK(report.mode_label == "theorem_odd-smoke");
  REQUIRE(report.sigma2_by_order.size() == 1);
  CHECK(report.sigma2_by_order[0] >= 0.0);
  CHECK(report.sigma2_by_order[0] <= 1e-10);
  CHECK(has_comparison(report, "degenerate-limit"));
  CHECK(!has_comparison(report, "variance"));
  CHECK(!has_comparison(report, "ks-mixture"));
  CHECK(!report.stats[0].ks.has_value());
  for (const auto& row : report.comparisons)
    if (row.name == "degenerate-limit") CHECK(row.pass);
}

TEST_CASE("a single replicate yields rows but no aggregate verdicts") {
  auto config = base_config(ExperimentMode::theorem_odd);
  config.levels = {4};
  config.replicates = 1;
  const auto report = run_theorem_check(config);
  CHECK(report.schema_version == 1);
  REQUIRE(report.stats.size() == 1);
  CHECK(report.stats[0].count == 1);
  CHECK(!report.stats[0].ks.has_value());
  REQUIRE(report.replicate_rows.size() == 1);
  CHECK(report.replicate_rows[0].replicate == 0);
  // The pathwise identity is still checked; nothing statistical is.
  REQUIRE(report.comparisons.size() == 1);
  CHECK(report.comparisons[0].name == "identity");
  CHECK(report.comparisons[0].pass);
}

TEST_CASE("reports are deterministic and worker-invariant") {
  auto config = base_config(ExperimentMode::theorem_odd);
  config.orders = {1, 2};
  config.times = {0.5, 1.0};
  config.replicates = 150;

  const auto a = run_theorem_check(config);
  const auto b = run_theorem_check(config);
  CHECK(zeroed_json(a) == zeroed_json(b));
  CHECK(report_to_csv(a) == report_to_csv(b));

  auto parallel = config;
  parallel.workers = 3;
  const auto c = run_theorem_check(parallel);
  // Identical statistics regardless of scheduling; only the config echo and
  // wall time may differ, so compare the data sections via CSV.
  CHECK(report_to_csv(a) == report_to_csv(c));

  CHECK(a.quarantined == 0);
  CHECK(a.identity_max_gap <= 1e-9);

  // Odd Hermite orders evaluated are 2r - 1.
  std::vector<int> orders;
  for (const auto& row : a.stats) orders.push_back(row.order);
  CHECK(std::count(orders.begin(), orders.end(), 1) == 2);
  CHECK(std::count(orders.begin(), orders.end(), 3) == 2);

  // H = 1/2 constants are exact factorials of the evaluated orders.
  REQUIRE(a.sigma2_by_order.size() == 2);
  CHECK(a.sigma2_by_order[0] == 1.0);
  CHECK(a.sigma2_by_order[1] == 6.0);

  // Full aggregate surface is present.
  CHECK(a.stats[0].ks.has_value());
  CHECK(has_comparison(a, "variance"));
  CHECK(has_comparison(a, "ks-mixture"));
  CHECK(has_comparison(a, "mean-zero"));
  CHECK(has_comparison(a, "cross-order-corr"));
  CHECK(has_comparison(a, "identity"));

  // JSON round trip is bit-exact.
  const std::string text = report_to_json(a);
  const auto parsed = report_from_json(text);
  CHECK(report_to_json(parsed) == text);
}

TEST_CASE("csv reports") {
  const std::string empty = report_to_csv(ExperimentReport{});
  CHECK(empty.rfind("section,name,level,order", 0) == 0);
  CHECK(std::count(empty.begin(), empty.end(), '\n') == 1);

  CHECK_THROWS_AS(write_report(ExperimentReport{}, "/tmp/fbmbt_test_report.xml",
                               "xml"),
                  std::invalid_argument);
  CHECK_THROWS_AS(write_report(ExperimentReport{},
                               "/nonexistent_dir_fbmbt/report.json", "json"),
                  std::runtime_error);
}

TEST_CASE("ks_distance calibration and power") {
  CHECK_THROWS_AS(ks_distance(std::vector<double>(99, 0.0),
                              [](double) { return 0.5; }),
                  std::invalid_argument);

  const auto phi = [](double z) {
    return 0.5 * std::erfc(-z * std::numbers::sqrt2 / 2.0);
  };

  Rng rng(4242);
  std::vector<double> gaussians(10000);
  for (double& x : gaussians) x = rng.gaussian();
  CHECK(ks_distance(gaussians, phi) <= 0.02);

  // A point mass sits 1/2 away from any continuous CDF's median.
  const double flat = ks_distance(std::vector<double>(200, 0.0), phi);
  CHECK(flat == doctest::Approx(0.5).epsilon(1e-12));

  // The same gaussian sample is far from the variance-mixture law.
  const double off = ks_distance(
      gaussians, [](double z) { return mixture_cdf_odd(z, 1.0, 1.0); });
  INFO("distance from mixture = ", off);
  CHECK(off > 0.05);
}

TEST_CASE("worker resolution order: explicit, environment, hardware") {
  const char* saved = std::getenv("FBMBT_WORKERS");
  const std::string backup = saved ? saved : "";

  CHECK(resolve_worker_count(7) == 7);

  setenv("FBMBT_WORKERS", "3", 1);
  CHECK(resolve_worker_count(0) == 3);
  CHECK(resolve_worker_count(2) == 2);  // explicit still wins

  setenv("FBMBT_WORKERS", "abc", 1);
  CHECK_THROWS_AS(resolve_worker_count(0), std::invalid_argument);
  setenv("FBMBT_WORKERS", "0", 1);
  CHECK_THROWS_AS(resolve_worker_count(0), std::invalid_argument);
  setenv("FBMBT_WORKERS", "5000", 1);
  CHECK_THROWS_AS(resolve_worker_count(0), std::invalid_argument);

  unsetenv("FBMBT_WORKERS");
  CHECK(resolve_worker_count(0) >= 1);

  if (saved) setenv("FBMBT_WORKERS", backup.c_str(), 1);
}

TEST_CASE("reference-simulator runs are structural even off H = 1/2") {
  auto config = base_config(ExperimentMode::bmrs_reference);
  config.hurst = 0.6;  // irrelevant to the simulator; label must not change
  config.times = {1.0, 2.0};
  config.bmrs_path_mesh = 0x1p-14;
  config.oracle_walk_steps = std::size_t(1) << 12;
  config.oracle_replicates = 200;
  const auto report = run_bmrs_reference(config);
  CHECK(report.mode_label == "bmrs_reference");
  REQUIRE(report.sq_local_time_oracle.has_value());
  CHECK(report.sq_local_time_oracle->value > 0.9);
  CHECK(report.sq_local_time_oracle->value < 1.25);
  CHECK(report.sq_local_time_oracle->std_error > 0.0);
  CHECK(has_comparison(report, "variance"));
  CHECK(has_comparison(report, "t-ratio"));
  CHECK(!has_comparison(report, "identity"));
  for (const auto& row : report.stats) CHECK(!row.ks.has_value());
  for (const auto& row : report.comparisons)
    if (row.name == "variance")
      CHECK(row.provenance.rfind("oracle-mc", 0) == 0);
}

TEST_CASE("even-order theorem runs carry the oracle and skip the ks gate") {
  auto config = base_config(ExperimentMode::theorem_even);
  config.levels = {5};
  config.oracle_walk_steps = std::size_t(1) << 12;
  config.oracle_replicates = 200;
  const auto report = run_theorem_check(config);
  CHECK(report.mode_label == "theorem_even");
  REQUIRE(report.sq_local_time_oracle.has_value());
  CHECK(report.sq_local_time_oracle->value ==
        doctest::Approx(8.0 / (3.0 * std::sqrt(2.0 * std::numbers::pi)))
            .epsilon(0.10));
  CHECK(!report.stats[0].ks.has_value());
  CHECK(!has_comparison(report, "ks-mixture"));
  CHECK(has_comparison(report, "variance"));
  CHECK(has_comparison(report, "identity"));
  REQUIRE(report.sigma2_by_order.size() == 1);
  CHECK(report.sigma2_by_order[0] == 2.0);  // sigma_2^2 = 2! at H = 1/2
}
