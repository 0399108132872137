#pragma once

// Desk-scale statistical verification harness: Monte Carlo replication of the
// variation statistics, aggregation, and comparison against the limit-law
// targets, emitted as deterministic JSON/CSV reports.
//
// Replicate i derives every stream from fold(master_seed, replicate, i), so
// reports are byte-identical (modulo wall_time_seconds) across runs and
// worker counts.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace fbmbt {

enum class ExperimentMode {
  theorem_odd,      // Hermite orders 2r-1, target sigma * B(Y_t)
  theorem_even,     // Hermite orders 2r, target sigma * int L dB
  corollary_odd,    // raw odd power variations + decomposition identity
  corollary_even,   // centered even power variations + identity
  bmrs_reference,   // scenery-integral simulator reference statistics
};

std::string to_string(ExperimentMode mode);
ExperimentMode mode_from_string(const std::string& name);

struct ExperimentConfig {
  double hurst = 0.5;
  std::vector<int> levels;     // n
  std::vector<int> orders;     // r; Hermite order is 2r-1 (odd) or 2r (even)
  std::vector<double> times;
  std::size_t replicates = 0;
  std::uint64_t master_seed = 0;
  ExperimentMode mode = ExperimentMode::theorem_odd;
  bool override_hypotheses = false;
  std::size_t workers = 0;     // 0 -> FBMBT_WORKERS env or hardware

  // bmrs_reference knobs
  double bmrs_cutoff = 4.0;
  int bmrs_refinement = 8;
  double bmrs_path_mesh = 0x1p-16;

  // constants
  double sigma_tol = 1e-8;
  std::size_t oracle_walk_steps = std::size_t(1) << 17;
  std::size_t oracle_replicates = 4000;
};

// One aggregate statistic row per (level, order, t).
struct StatRow {
  int level;
  int order;               // Hermite order / power actually evaluated
  double t;
  std::size_t count;
  double mean, se_mean;
  double variance, se_variance;
  std::optional<double> ks;  // odd families only
};

// A pass/fail comparison with its pinned tolerance.
struct ComparisonRow {
  std::string name;        // variance | ks-mixture | mean-zero | t-ratio |
                           // cross-order-corr | identity
  int level;
  int order;               // 0 when not order-specific
  int order2 = 0;          // second order for cross rows
  double t;
  double t2 = 0.0;         // second time for ratio rows
  double empirical;
  double target;
  std::string provenance;  // closed-form | quadrature | oracle-mc(...) | exact
  double tolerance;
  double error;            // |empirical - target| (relative where documented)
  bool pass;
};

struct ReplicateRow {
  std::size_t replicate;
  int level;
  int order;
  double t;
  double value;
};

struct OracleRecord {
  double value;
  double std_error;
  std::size_t walk_steps;
  std::size_t replicates;
};

struct ExperimentReport {
  int schema_version = 1;
  ExperimentConfig config;
  std::string mode_label;  // smoke runs (H != 1/2) are labelled
  std::vector<StatRow> stats;
  std::vector<ComparisonRow> comparisons;
  std::vector<ReplicateRow> replicate_rows;  // included when M <= 1000
  std::vector<double> sigma2_by_order;       // indexed like config.orders
  std::optional<OracleRecord> sq_local_time_oracle;
  std::size_t quarantined = 0;
  double identity_max_gap = 0.0;  // direct vs separated / decomposition
  double wall_time_seconds = 0.0;
};

// Kolmogorov-Smirnov distance between a sample (>= 100 points) and a CDF.
double ks_distance(std::vector<double> samples,
                   const std::function<double(double)>& cdf);

// Mode hypothesis checks (odd: H <= 1/2, even: H < 3/4) gate both runners
// unless config.override_hypotheses; violations throw std::invalid_argument
// (CLI exit code 3).  Nonfinite replicate statistics are quarantined and the
// run throws if they exceed 0.1% of replicates.
ExperimentReport run_theorem_check(const ExperimentConfig& config);
ExperimentReport run_corollary_check(const ExperimentConfig& config);
ExperimentReport run_bmrs_reference(const ExperimentConfig& config);

bool all_comparisons_pass(const ExperimentReport& report);

// Deterministic serialisation: fixed key order, shortest round-trip doubles.
// parse(write(report)) reproduces every numeric field bit-exactly.
std::string report_to_json(const ExperimentReport& report);
ExperimentReport report_from_json(const std::string& text);
// CSV: one row per (n, r, t, statistic); replicate rows carry an index.
std::string report_to_csv(const ExperimentReport& report);

void write_report(const ExperimentReport& report, const std::string& path,
                  const std::string& format);  // "json" or "csv"

// Worker resolution: explicit > FBMBT_WORKERS env > hardware concurrency.
std::size_t resolve_worker_count(std::size_t requested);

}  // namespace fbmbt
