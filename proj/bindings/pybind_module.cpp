// Python bindings for the core library: constants, samplers, variation
// statistics, limit-law simulators, the experiment runners, and the file
// formats.  Bulk vectors cross the boundary as numpy arrays (copies).

#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>
#include <vector>

#include "fbmbt/dyadic.hpp"
#include "fbmbt/experiment.hpp"
#include "fbmbt/gaussian.hpp"
#include "fbmbt/hermite.hpp"
#include "fbmbt/io.hpp"
#include "fbmbt/limit_laws.hpp"
#include "fbmbt/rng.hpp"
#include "fbmbt/variation.hpp"

namespace py = pybind11;
using namespace fbmbt;

namespace {

// Builds numpy arrays through numpy's python-level API rather than
// pybind11's numpy C-API layer, so the module works against both numpy 1.x
// and 2.x regardless of the pybind11 version it was compiled with.
template <typename T>
py::object to_array(const std::vector<T>& v) {
  return py::module_::import("numpy").attr("asarray")(py::cast(v));
}

}  // namespace

PYBIND11_MODULE(_fbmbt, m) {
  m.doc() =
      "Power variations of fractional Brownian motion in Brownian time: "
      "exact crossing statistics, limit-law constants and simulators, and "
      "the statistical verification harness.";

  // ---- Hermite / constants ------------------------------------------------
  m.def("hermite_eval", &hermite_eval, py::arg("order"), py::arg("x"),
        "Probabilists' Hermite polynomial H_k(x).");
  m.def(
      "power_to_hermite",
      [](int p) { return to_array(power_to_hermite(p).coeffs); },
      py::arg("power"),
      "Coefficients a_k with x^p = sum_k a_k H_k(x); a[k] multiplies H_k.");
  m.def("odd_power_coeff", &odd_power_coeff, py::arg("r"), py::arg("k"),
        "Coefficient of H_{2k-1} in x^{2r-1}, 1 <= k <= r.");
  m.def("even_power_coeff", &even_power_coeff, py::arg("r"), py::arg("k"),
        "Coefficient of H_{2k} in x^{2r}, 0 <= k <= r; k = 0 is E[N^{2r}].");
  m.def("gaussian_even_moment", &gaussian_even_moment, py::arg("r"),
        "E[N^{2r}] = (2r-1)!! for a standard normal.");
  m.def("gaussian_abs_moment", &gaussian_abs_moment, py::arg("p"),
        "E|N|^p for a standard normal, real p >= 0.");

  m.def(
      "rho", [](double h, std::int64_t lag) { return rho(Hurst(h), lag); },
      py::arg("hurst"), py::arg("lag"),
      "Autocovariance of unit-variance fractional Gaussian noise at an "
      "integer lag.");

  py::class_<SigmaConstant>(m, "SigmaConstant")
      .def_readonly("order", &SigmaConstant::order)
      .def_readonly("hurst", &SigmaConstant::hurst)
      .def_readonly("sigma2", &SigmaConstant::sigma2)
      .def_readonly("sigma", &SigmaConstant::sigma)
      .def_readonly("truncation", &SigmaConstant::truncation)
      .def_readonly("tail_bound", &SigmaConstant::tail_bound)
      .def("__repr__", [](const SigmaConstant& s) {
        std::ostringstream os;
        os << "SigmaConstant(order=" << s.order << ", hurst=" << s.hurst
           << ", sigma2=" << s.sigma2 << ")";
        return os.str();
      });
  m.def(
      "sigma_constant",
      [](int order, double h, double tol) {
        return sigma_constant(order, Hurst(h), tol);
      },
      py::arg("order"), py::arg("hurst"), py::arg("tol") = 1e-8,
      "sigma_r^2 = r! sum_a rho(a)^r with a certified tail bound; raises "
      "ValueError where the series diverges (H >= 1 - 1/(2r), H != 1/2).");

  m.def(
      "mixture_cdf_odd",
      [](double z, double t, double sigma) {
        return mixture_cdf_odd(z, t, sigma);
      },
      py::arg("z"), py::arg("t"), py::arg("sigma"),
      "CDF of sigma * B(Y_t), the odd-order limit law.");

  // ---- Gaussian samplers --------------------------------------------------
  m.def(
      "sample_fgn",
      [](double h, std::size_t m, std::uint64_t seed) {
        return to_array(sample_fgn(Hurst(h), m, seed).values);
      },
      py::arg("hurst"), py::arg("m"), py::arg("seed"),
      "Stationary fGn sequence of length m (circulant embedding; exact in "
      "law; bit-reproducible for fixed arguments).");

  py::class_<FbmGrid>(m, "FbmGrid")
      .def_property_readonly("hurst",
                             [](const FbmGrid& g) { return g.hurst.value; })
      .def_readonly("step", &FbmGrid::step)
      .def_readonly("j_min", &FbmGrid::j_min)
      .def_property_readonly(
          "values", [](const FbmGrid& g) { return to_array(g.values); })
      .def("j_max", &FbmGrid::j_max)
      .def("value_at", &FbmGrid::value_at, py::arg("j"));
  m.def(
      "two_sided_fbm",
      [](double h, std::int64_t half_width, double step, std::uint64_t seed) {
        return two_sided_fbm(Hurst(h), half_width, step, seed);
      },
      py::arg("hurst"), py::arg("half_width"), py::arg("step"),
      py::arg("seed"),
      "Two-sided fBm on j*step, |j| <= half_width, with X(0) = 0 exactly.");
  m.def(
      "fbm_at_points",
      [](double h, std::vector<double> points, std::uint64_t seed,
         std::size_t cap) {
        return to_array(
            fbm_at_points(Hurst(h), PointSet(std::move(points)), seed, cap));
      },
      py::arg("hurst"), py::arg("points"), py::arg("seed"),
      py::arg("cap") = 4096,
      "Exact joint two-sided fBm values at strictly increasing points "
      "(dense Cholesky; cubic cost, point count capped).");

  py::class_<FgnWindow>(m, "FgnWindow")
      .def(py::init([](double h, std::vector<double> cells,
                       std::int64_t origin, std::uint64_t seed) {
             return FgnWindow{FgnPath{Hurst(h), seed, std::move(cells)},
                              origin};
           }),
           py::arg("hurst"), py::arg("cells"), py::arg("origin"),
           py::arg("seed") = 0,
           "Explicit window; cells[i] is the scenery at cell i - origin.")
      .def_readonly("origin", &FgnWindow::origin)
      .def_property_readonly(
          "values",
          [](const FgnWindow& w) { return to_array(w.path.values); })
      .def_property_readonly(
          "hurst", [](const FgnWindow& w) { return w.path.hurst.value; })
      .def("cell_begin", &FgnWindow::cell_begin)
      .def("cell_end", &FgnWindow::cell_end)
      .def("cell", &FgnWindow::cell, py::arg("j"));
  m.def(
      "sample_fgn_window",
      [](double h, std::int64_t half_width, std::uint64_t seed) {
        return sample_fgn_window(Hurst(h), half_width, seed);
      },
      py::arg("hurst"), py::arg("half_width"), py::arg("seed"),
      "Window of 2*half_width fGn cells centred on cell 0.");

  // ---- Dyadic walks and local times ---------------------------------------
  m.def("horizon_steps", &horizon_steps, py::arg("level"), py::arg("t"),
        "floor(2^n t): walk steps inside horizon t at level n.");

  py::class_<DyadicWalk>(m, "DyadicWalk")
      .def_property_readonly("level",
                             [](const DyadicWalk& w) { return w.level.n; })
      .def_property_readonly(
          "spacing", [](const DyadicWalk& w) { return w.level.spacing(); })
      .def_readonly("seed", &DyadicWalk::seed)
      .def_property_readonly(
          "steps", [](const DyadicWalk& w) { return to_array(w.steps); })
      .def("num_steps", &DyadicWalk::num_steps);
  m.def(
      "simulate_walk",
      [](int level, std::size_t num_steps, std::uint64_t seed) {
        return simulate_walk(DyadicLevel{level}, num_steps, seed);
      },
      py::arg("level"), py::arg("num_steps"), py::arg("seed"),
      "Fair +-1 walk on the level-n grid, steps[0] = 0.");

  py::class_<CrossingCounts>(m, "CrossingCounts")
      .def_property_readonly(
          "level", [](const CrossingCounts& c) { return c.level.n; })
      .def_readonly("horizon", &CrossingCounts::horizon)
      .def_readonly("cell_min", &CrossingCounts::cell_min)
      .def_property_readonly(
          "up", [](const CrossingCounts& c) { return to_array(c.up); })
      .def_property_readonly(
          "down", [](const CrossingCounts& c) { return to_array(c.down); })
      .def("cell_end", &CrossingCounts::cell_end)
      .def("up_at", &CrossingCounts::up_at, py::arg("j"))
      .def("down_at", &CrossingCounts::down_at, py::arg("j"));
  m.def("count_crossings", &count_crossings, py::arg("walk"),
        py::arg("horizon"),
        "Per-cell up/down transition tallies over the first `horizon` "
        "steps.");
  m.def("endpoint_index", &endpoint_index, py::arg("walk"), py::arg("t"),
        "Walk position after floor(2^n t) steps, in grid index units.");

  py::class_<LocalTimeProfile>(m, "LocalTimeProfile")
      .def_property_readonly(
          "x", [](const LocalTimeProfile& p) { return to_array(p.x); })
      .def_property_readonly(
          "value", [](const LocalTimeProfile& p) { return to_array(p.value); })
      .def_readonly("horizon", &LocalTimeProfile::horizon);
  m.def("walk_local_time", &walk_local_time, py::arg("counts"),
        "L(j 2^{-n/2}) = 2^{-n/2} (up[j] + down[j]).");

  py::class_<BrownianPath>(m, "BrownianPath")
      .def_readonly("horizon", &BrownianPath::horizon)
      .def_readonly("mesh", &BrownianPath::mesh)
      .def_readonly("seed", &BrownianPath::seed)
      .def_property_readonly(
          "values", [](const BrownianPath& p) { return to_array(p.values); });
  m.def("simulate_brownian", &simulate_brownian, py::arg("horizon"),
        py::arg("mesh"), py::arg("seed"),
        "Brownian path on a uniform mesh over [0, horizon].");
  m.def(
      "occupation_local_time",
      [](const BrownianPath& path, std::vector<double> grid,
         double bandwidth) {
        return occupation_local_time(path, grid, bandwidth);
      },
      py::arg("path"), py::arg("x_grid"), py::arg("bandwidth"),
      "Top-hat occupation estimate of Brownian local time on an increasing "
      "grid; recommended bandwidth is c*sqrt(mesh), c in [5, 20].");

  py::class_<CoupledCrossings>(m, "CoupledCrossings")
      .def_readonly("walks", &CoupledCrossings::walks)
      .def_readonly("occupation", &CoupledCrossings::occupation)
      .def_readonly("simulated_time", &CoupledCrossings::simulated_time);
  m.def(
      "coupled_crossings",
      [](std::vector<int> levels, double t, double mesh,
         double bandwidth_factor, std::uint64_t seed) {
        return coupled_crossings(levels, t, mesh, bandwidth_factor, seed);
      },
      py::arg("levels"), py::arg("t"), py::arg("mesh"),
      py::arg("bandwidth_factor"), py::arg("seed"),
      "One fine Brownian path driving nested walks at every level plus an "
      "occupation local-time profile on the finest grid.");

  // ---- Variation statistics -----------------------------------------------
  py::class_<VariationStatistic>(m, "VariationStatistic")
      .def_readonly("hurst", &VariationStatistic::hurst)
      .def_readonly("level", &VariationStatistic::level)
      .def_readonly("order", &VariationStatistic::order)
      .def_readonly("t", &VariationStatistic::t)
      .def_readonly("value", &VariationStatistic::value)
      .def("__repr__", [](const VariationStatistic& v) {
        std::ostringstream os;
        os << "VariationStatistic(order=" << v.order << ", level=" << v.level
           << ", t=" << v.t << ", value=" << v.value << ")";
        return os.str();
      });
  m.def(
      "window_for_walk",
      [](double h, const DyadicWalk& walk, std::uint64_t seed) {
        return window_for_walk(Hurst(h), walk, seed);
      },
      py::arg("hurst"), py::arg("walk"), py::arg("seed"),
      "Samples an fGn window sized to cover the walk's range.");
  m.def("hermite_variation_direct", &hermite_variation_direct,
        py::arg("order"), py::arg("t"), py::arg("window"), py::arg("walk"),
        "V^(r)(t) summed along the walk.");
  m.def("hermite_variation_separated", &hermite_variation_separated,
        py::arg("order"), py::arg("t"), py::arg("window"), py::arg("counts"),
        "V^(r)(t) from crossing counts; equals the direct form exactly.");
  m.def("power_variation_odd", &power_variation_odd, py::arg("r"),
        py::arg("t"), py::arg("window"), py::arg("walk"),
        "Raw odd power variation of order 2r-1.");
  m.def("power_variation_even", &power_variation_even, py::arg("r"),
        py::arg("t"), py::arg("window"), py::arg("walk"),
        "Centered even power variation of order 2r.");

  py::class_<DyadicTimeVariation>(m, "DyadicTimeVariation")
      .def_readonly("p", &DyadicTimeVariation::p)
      .def_readonly("level", &DyadicTimeVariation::level)
      .def_readonly("t", &DyadicTimeVariation::t)
      .def_readonly("raw", &DyadicTimeVariation::raw)
      .def_readonly("normalized", &DyadicTimeVariation::normalized);
  m.def(
      "dyadic_time_variation",
      [](int p, int level, double t, double h, std::uint64_t seed,
         std::size_t cap) {
        return dyadic_time_variation(p, level, t, Hurst(h), seed, cap);
      },
      py::arg("p"), py::arg("level"), py::arg("t"), py::arg("hurst"),
      py::arg("seed"), py::arg("cap") = 4096,
      "Power variation sampled at dyadic times (exact joint sampling; point "
      "count capped).");

  // ---- Limit-law simulators -----------------------------------------------
  m.def(
      "simulate_b_of_y",
      [](std::vector<double> times, std::uint64_t seed) {
        return to_array(simulate_b_of_y(times, seed));
      },
      py::arg("times"), py::arg("seed"),
      "B(Y_t) at increasing times; exact in law.");

  py::class_<SceneryIntegral>(m, "SceneryIntegral")
      .def_readonly("t", &SceneryIntegral::t)
      .def_readonly("cutoff", &SceneryIntegral::cutoff)
      .def_readonly("refinement", &SceneryIntegral::refinement)
      .def_readonly("value", &SceneryIntegral::value)
      .def_readonly("conditional_variance",
                    &SceneryIntegral::conditional_variance);
  m.def("simulate_scenery_integral", &simulate_scenery_integral, py::arg("t"),
        py::arg("cutoff"), py::arg("refinement"), py::arg("seed"),
        py::arg("path_mesh") = 0x1p-16, py::arg("bandwidth_factor") = 10.0,
        "Riemann-Ito discretisation of the Brownian-scenery integral "
        "int L_t^x dB_x.");

  py::class_<OracleEstimate>(m, "OracleEstimate")
      .def_readonly("value", &OracleEstimate::value)
      .def_readonly("std_error", &OracleEstimate::std_error)
      .def_readonly("walk_steps", &OracleEstimate::walk_steps)
      .def_readonly("replicates", &OracleEstimate::replicates);
  m.def("estimate_sq_local_time_integral", &estimate_sq_local_time_integral,
        py::arg("walk_steps"), py::arg("replicates"), py::arg("seed"),
        "MC oracle for E[int (L_1^x)^2 dx] from random-walk visit counts.");

  // ---- Experiment harness -------------------------------------------------
  py::enum_<ExperimentMode>(m, "ExperimentMode")
      .value("theorem_odd", ExperimentMode::theorem_odd)
      .value("theorem_even", ExperimentMode::theorem_even)
      .value("corollary_odd", ExperimentMode::corollary_odd)
      .value("corollary_even", ExperimentMode::corollary_even)
      .value("bmrs_reference", ExperimentMode::bmrs_reference);
  m.def("mode_from_string", &mode_from_string, py::arg("name"));
  m.def(
      "mode_to_string", [](ExperimentMode mode) { return to_string(mode); },
      py::arg("mode"));

  py::class_<ExperimentConfig>(m, "ExperimentConfig")
      .def(py::init<>())
      .def_readwrite("hurst", &ExperimentConfig::hurst)
      .def_readwrite("levels", &ExperimentConfig::levels)
      .def_readwrite("orders", &ExperimentConfig::orders)
      .def_readwrite("times", &ExperimentConfig::times)
      .def_readwrite("replicates", &ExperimentConfig::replicates)
      .def_readwrite("master_seed", &ExperimentConfig::master_seed)
      .def_readwrite("mode", &ExperimentConfig::mode)
      .def_readwrite("override_hypotheses",
                     &ExperimentConfig::override_hypotheses)
      .def_readwrite("workers", &ExperimentConfig::workers)
      .def_readwrite("bmrs_cutoff", &ExperimentConfig::bmrs_cutoff)
      .def_readwrite("bmrs_refinement", &ExperimentConfig::bmrs_refinement)
      .def_readwrite("bmrs_path_mesh", &ExperimentConfig::bmrs_path_mesh)
      .def_readwrite("sigma_tol", &ExperimentConfig::sigma_tol)
      .def_readwrite("oracle_walk_steps", &ExperimentConfig::oracle_walk_steps)
      .def_readwrite("oracle_replicates",
                     &ExperimentConfig::oracle_replicates);

  py::class_<StatRow>(m, "StatRow")
      .def_readonly("level", &StatRow::level)
      .def_readonly("order", &StatRow::order)
      .def_readonly("t", &StatRow::t)
      .def_readonly("count", &StatRow::count)
      .def_readonly("mean", &StatRow::mean)
      .def_readonly("se_mean", &StatRow::se_mean)
      .def_readonly("variance", &StatRow::variance)
      .def_readonly("se_variance", &StatRow::se_variance)
      .def_readonly("ks", &StatRow::ks);

  py::class_<ComparisonRow>(m, "ComparisonRow")
      .def_readonly("name", &ComparisonRow::name)
      .def_readonly("level", &ComparisonRow::level)
      .def_readonly("order", &ComparisonRow::order)
      .def_readonly("order2", &ComparisonRow::order2)
      .def_readonly("t", &ComparisonRow::t)
      .def_readonly("t2", &ComparisonRow::t2)
      .def_readonly("empirical", &ComparisonRow::empirical)
      .def_readonly("target", &ComparisonRow::target)
      .def_readonly("provenance", &ComparisonRow::provenance)
      .def_readonly("tolerance", &ComparisonRow::tolerance)
      .def_readonly("error", &ComparisonRow::error)
      .def_readonly("pass_", &ComparisonRow::pass)
      .def("__repr__", [](const ComparisonRow& r) {
        std::ostringstream os;
        os << "ComparisonRow(name=" << r.name << ", order=" << r.order
           << ", t=" << r.t << ", empirical=" << r.empirical
           << ", target=" << r.target << ", pass=" << (r.pass ? "True" : "False")
           << ")";
        return os.str();
      });

  py::class_<ReplicateRow>(m, "ReplicateRow")
      .def_readonly("replicate", &ReplicateRow::replicate)
      .def_readonly("level", &ReplicateRow::level)
      .def_readonly("order", &ReplicateRow::order)
      .def_readonly("t", &ReplicateRow::t)
      .def_readonly("value", &ReplicateRow::value);

  py::class_<OracleRecord>(m, "OracleRecord")
      .def_readonly("value", &OracleRecord::value)
      .def_readonly("std_error", &OracleRecord::std_error)
      .def_readonly("walk_steps", &OracleRecord::walk_steps)
      .def_readonly("replicates", &OracleRecord::replicates);

  py::class_<ExperimentReport>(m, "ExperimentReport")
      .def_readonly("schema_version", &ExperimentReport::schema_version)
      .def_readonly("config", &ExperimentReport::config)
      .def_readonly("mode_label", &ExperimentReport::mode_label)
      .def_readonly("stats", &ExperimentReport::stats)
      .def_readonly("comparisons", &ExperimentReport::comparisons)
      .def_readonly("replicate_rows", &ExperimentReport::replicate_rows)
      .def_readonly("sigma2_by_order", &ExperimentReport::sigma2_by_order)
      .def_readonly("sq_local_time_oracle",
                    &ExperimentReport::sq_local_time_oracle)
      .def_readonly("quarantined", &ExperimentReport::quarantined)
      .def_readonly("identity_max_gap", &ExperimentReport::identity_max_gap)
      .def_readonly("wall_time_seconds", &ExperimentReport::wall_time_seconds)
      .def("to_json", [](const ExperimentReport& r) { return report_to_json(r); })
      .def("to_csv", [](const ExperimentReport& r) { return report_to_csv(r); });

  m.def(
      "ks_distance",
      [](std::vector<double> samples, std::function<double(double)> cdf) {
        return ks_distance(std::move(samples), cdf);
      },
      py::arg("samples"), py::arg("cdf"),
      "Kolmogorov-Smirnov distance between a sample (>= 100 points) and a "
      "CDF callable.");
  m.def("run_theorem_check", &run_theorem_check, py::arg("config"),
        py::call_guard<py::gil_scoped_release>(),
        "Monte Carlo check of the odd/even variation limit laws.");
  m.def("run_corollary_check", &run_corollary_check, py::arg("config"),
        py::call_guard<py::gil_scoped_release>(),
        "Monte Carlo check of the power-variation decomposition and limits.");
  m.def("run_bmrs_reference", &run_bmrs_reference, py::arg("config"),
        py::call_guard<py::gil_scoped_release>(),
        "Reference statistics for the scenery-integral simulator.");
  m.def("all_comparisons_pass", &all_comparisons_pass, py::arg("report"));
  m.def("report_from_json", &report_from_json, py::arg("text"));
  m.def("write_report", &write_report, py::arg("report"), py::arg("path"),
        py::arg("format"), "Write a report as 'json' or 'csv'.");
  m.def("resolve_worker_count", &resolve_worker_count, py::arg("requested"),
        "Explicit count > FBMBT_WORKERS env > hardware concurrency.");

  // ---- File formats ---------------------------------------------------------
  m.def(
      "path_to_bytes",
      [](double hurst, std::vector<double> values) {
        std::ostringstream os(std::ios::binary);
        write_path_binary(hurst, values, os);
        return py::bytes(os.str());
      },
      py::arg("hurst"), py::arg("values"),
      "Serialize a sampled path to the binary path format.");
  py::class_<BinaryPath>(m, "BinaryPath")
      .def_readonly("hurst", &BinaryPath::hurst)
      .def_property_readonly(
          "values", [](const BinaryPath& p) { return to_array(p.values); });
  m.def(
      "path_from_bytes",
      [](const py::bytes& blob) {
        std::istringstream is(std::string(blob), std::ios::binary);
        return read_path_binary(is);
      },
      py::arg("blob"), "Parse the binary path format (validates header).");
  m.def(
      "local_time_csv",
      [](const LocalTimeProfile& profile) {
        std::ostringstream os;
        write_local_time_csv(profile, os);
        return os.str();
      },
      py::arg("profile"));
  m.def(
      "crossing_counts_csv",
      [](const CrossingCounts& counts) {
        std::ostringstream os;
        write_crossing_counts_csv(counts, os);
        return os.str();
      },
      py::arg("counts"));
}
