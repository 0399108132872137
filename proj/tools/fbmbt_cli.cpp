// fbmbt: simulators, constants, and statistical verification runs for power
// variations of fractional Brownian motion in Brownian time.
//
// Exit codes: 0 = success / all comparisons within tolerance,
//             2 = at least one comparison failed,
//             3 = configuration error.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "fbmbt/dyadic.hpp"
#include "fbmbt/experiment.hpp"
#include "fbmbt/gaussian.hpp"
#include "fbmbt/hermite.hpp"
#include "fbmbt/io.hpp"
#include "fbmbt/limit_laws.hpp"
#include "fbmbt/rng.hpp"
#include "fbmbt/variation.hpp"

namespace {

using nlohmann::ordered_json;

std::string dump_number(double value) { return ordered_json(value).dump(); }

void emit(const std::string& out_path, const std::string& content) {
  if (out_path.empty() || out_path == "-") {
    std::cout << content;
  } else {
    fbmbt::write_text_file(out_path, content);
  }
}

struct VerifyOptions {
  double hurst = 0.5;
  std::vector<int> levels{16};
  std::vector<int> orders{1};
  std::vector<double> times{1.0};
  std::size_t reps = 200;
  std::uint64_t seed = 1;
  std::size_t workers = 0;
  std::string out;
  std::string format = "json";
  bool override_hypotheses = false;
};

void add_verify_flags(CLI::App* cmd, VerifyOptions* opt) {
  cmd->add_option("--H", opt->hurst, "Hurst index in (0, 1)");
  cmd->add_option("--n", opt->levels, "dyadic level(s), repeatable");
  cmd->add_option("--r", opt->orders, "order(s) r, repeatable");
  cmd->add_option("--t", opt->times, "time horizon(s), repeatable");
  cmd->add_option("--reps", opt->reps, "Monte Carlo replicates");
  cmd->add_option("--seed", opt->seed, "master seed");
  cmd->add_option("--workers", opt->workers,
                  "worker threads (0: FBMBT_WORKERS or hardware)");
  cmd->add_option("--out", opt->out, "output file ('-' for stdout)");
  cmd->add_option("--format", opt->format, "report format: json or csv")
      ->check(CLI::IsMember({"json", "csv"}));
  cmd->add_flag("--override-hypotheses", opt->override_hypotheses,
                "run outside the theorem hypotheses");
}

fbmbt::ExperimentConfig to_config(const VerifyOptions& opt,
                                  fbmbt::ExperimentMode mode) {
  fbmbt::ExperimentConfig config;
  config.hurst = opt.hurst;
  config.levels = opt.levels;
  config.orders = opt.orders;
  config.times = opt.times;
  config.replicates = opt.reps;
  config.master_seed = opt.seed;
  config.mode = mode;
  config.override_hypotheses = opt.override_hypotheses;
  config.workers = opt.workers;
  return config;
}

int finish_run(const fbmbt::ExperimentReport& report,
               const VerifyOptions& opt) {
  const std::string content = opt.format == "csv"
                                  ? fbmbt::report_to_csv(report)
                                  : fbmbt::report_to_json(report);
  emit(opt.out, content);
  if (!fbmbt::all_comparisons_pass(report)) {
    std::size_t failed = 0;
    for (const auto& row : report.comparisons)
      if (!row.pass) ++failed;
    std::cerr << failed << " comparison(s) outside tolerance\n";
    return 2;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Power variations of fractional Brownian motion in Brownian time: "
      "simulators, limit constants, and verification runs"};
  app.require_subcommand(1);

  // ---- simulate ----------------------------------------------------------
  CLI::App* simulate =
      app.add_subcommand("simulate", "sample paths and statistics");
  simulate->require_subcommand(1);

  struct {
    double hurst = 0.5;
    std::size_t m = 1024;
    std::uint64_t seed = 1;
    std::string out;
    std::string format = "csv";
  } fgn_opt;
  CLI::App* sim_fgn =
      simulate->add_subcommand("fgn", "fractional Gaussian noise sequence");
  sim_fgn->add_option("--H", fgn_opt.hurst, "Hurst index in (0, 1)");
  sim_fgn->add_option("--m", fgn_opt.m, "sequence length");
  sim_fgn->add_option("--seed", fgn_opt.seed, "seed");
  sim_fgn->add_option("--out", fgn_opt.out, "output file ('-' for stdout)");
  sim_fgn->add_option("--format", fgn_opt.format, "csv or bin")
      ->check(CLI::IsMember({"csv", "bin"}));

  struct {
    int level = 10;
    double t = 1.0;
    std::uint64_t seed = 1;
    std::string out;
    bool crossings = false;
  } walk_opt;
  CLI::App* sim_walk = simulate->add_subcommand(
      "walk", "dyadic walk (or its crossing counts) at level n");
  sim_walk->add_option("--n", walk_opt.level, "dyadic level");
  sim_walk->add_option("--t", walk_opt.t, "time horizon");
  sim_walk->add_option("--seed", walk_opt.seed, "seed");
  sim_walk->add_option("--out", walk_opt.out, "output file ('-' for stdout)");
  sim_walk->add_flag("--crossings", walk_opt.crossings,
                     "emit per-cell crossing counts instead of the path");

  struct {
    double hurst = 0.5;
    std::vector<int> levels{12};
    std::vector<int> orders{1};
    std::vector<double> times{1.0};
    std::size_t reps = 100;
    std::uint64_t seed = 1;
    std::string out;
  } var_opt;
  CLI::App* sim_var = simulate->add_subcommand(
      "variation", "replicated Hermite variation statistics (direct and "
                   "separated forms)");
  sim_var->add_option("--H", var_opt.hurst, "Hurst index in (0, 1)");
  sim_var->add_option("--n", var_opt.levels, "dyadic level(s), repeatable");
  sim_var->add_option("--r", var_opt.orders, "Hermite order(s), repeatable");
  sim_var->add_option("--t", var_opt.times, "time horizon(s), repeatable");
  sim_var->add_option("--reps", var_opt.reps, "replicates");
  sim_var->add_option("--seed", var_opt.seed, "master seed");
  sim_var->add_option("--out", var_opt.out, "output file ('-' for stdout)");

  struct {
    std::vector<double> times{1.0};
    double cutoff = 4.0;
    int refinement = 8;
    std::size_t reps = 100;
    std::uint64_t seed = 1;
    std::string out;
  } bmrs_sim_opt;
  CLI::App* sim_bmrs = simulate->add_subcommand(
      "bmrs", "Brownian-scenery integral samples (int L_t^x dB_x)");
  sim_bmrs->add_option("--t", bmrs_sim_opt.times, "time horizon(s)");
  sim_bmrs->add_option("--p", bmrs_sim_opt.cutoff, "spatial cutoff");
  sim_bmrs->add_option("--m", bmrs_sim_opt.refinement,
                       "spatial refinement (grid step 2^{-m/2})");
  sim_bmrs->add_option("--reps", bmrs_sim_opt.reps, "replicates");
  sim_bmrs->add_option("--seed", bmrs_sim_opt.seed, "master seed");
  sim_bmrs->add_option("--out", bmrs_sim_opt.out,
                       "output file ('-' for stdout)");

  // ---- constants ---------------------------------------------------------
  CLI::App* constants =
      app.add_subcommand("constants", "closed-form constants as JSON");
  constants->require_subcommand(1);

  struct {
    int p = 3;
    std::string out;
  } hermite_opt;
  CLI::App* const_hermite = constants->add_subcommand(
      "hermite", "Hermite expansion coefficients of x^p");
  const_hermite->add_option("--p", hermite_opt.p, "monomial power");
  const_hermite->add_option("--out", hermite_opt.out,
                            "output file ('-' for stdout)");

  struct {
    double hurst = 0.5;
    int order = 1;
    double tol = 1e-8;
    std::string out;
  } sigma_opt;
  CLI::App* const_sigma = constants->add_subcommand(
      "sigma", "limit variance constant sigma_r^2");
  const_sigma->add_option("--H", sigma_opt.hurst, "Hurst index in (0, 1)");
  const_sigma->add_option("--r", sigma_opt.order, "Hermite order");
  const_sigma->add_option("--tol", sigma_opt.tol, "tail tolerance");
  const_sigma->add_option("--out", sigma_opt.out,
                          "output file ('-' for stdout)");

  // ---- verify ------------------------------------------------------------
  CLI::App* verify =
      app.add_subcommand("verify", "statistical checks of the limit laws");
  verify->require_subcommand(1);

  VerifyOptions theorem_opt;
  std::string theorem_parity = "odd";
  CLI::App* verify_theorem = verify->add_subcommand(
      "theorem", "Hermite variations against their limit laws");
  verify_theorem->add_option("--parity", theorem_parity, "odd or even")
      ->check(CLI::IsMember({"odd", "even"}));
  add_verify_flags(verify_theorem, &theorem_opt);

  VerifyOptions corollary_opt;
  std::string corollary_parity = "odd";
  CLI::App* verify_corollary = verify->add_subcommand(
      "corollary", "power variations: decomposition identity and limit laws");
  verify_corollary->add_option("--parity", corollary_parity, "odd or even")
      ->check(CLI::IsMember({"odd", "even"}));
  add_verify_flags(verify_corollary, &corollary_opt);

  // ---- bmrs --------------------------------------------------------------
  VerifyOptions bmrs_opt;
  double bmrs_cutoff = 4.0;
  int bmrs_refinement = 8;
  CLI::App* bmrs = app.add_subcommand(
      "bmrs", "scenery-integral reference run (variance and t-scaling)");
  add_verify_flags(bmrs, &bmrs_opt);
  bmrs->add_option("--p", bmrs_cutoff, "spatial cutoff");
  bmrs->add_option("--m", bmrs_refinement,
                   "spatial refinement (grid step 2^{-m/2})");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim_fgn->parsed()) {
      const fbmbt::FgnPath path =
          fbmbt::sample_fgn(fbmbt::Hurst(fgn_opt.hurst), fgn_opt.m,
                            fgn_opt.seed);
      if (fgn_opt.format == "bin") {
        if (fgn_opt.out.empty() || fgn_opt.out == "-")
          throw std::invalid_argument("binary output needs --out FILE");
        std::ofstream os(fgn_opt.out, std::ios::binary);
        if (!os) throw std::runtime_error("cannot open " + fgn_opt.out);
        fbmbt::write_path_binary(path.hurst.value, path.values, os);
      } else {
        std::ostringstream os;
        fbmbt::write_fgn_csv(path, os);
        emit(fgn_opt.out, os.str());
      }
      return 0;
    }

    if (sim_walk->parsed()) {
      const std::size_t steps =
          fbmbt::horizon_steps(walk_opt.level, walk_opt.t);
      const fbmbt::DyadicWalk walk = fbmbt::simulate_walk(
          fbmbt::DyadicLevel{walk_opt.level}, steps, walk_opt.seed);
      std::ostringstream os;
      if (walk_opt.crossings) {
        fbmbt::write_crossing_counts_csv(fbmbt::count_crossings(walk, steps),
                                         os);
      } else {
        os << "index,value\n";
        for (std::size_t k = 0; k < walk.steps.size(); ++k)
          os << k << ',' << walk.steps[k] << '\n';
      }
      emit(walk_opt.out, os.str());
      return 0;
    }

    if (sim_var->parsed()) {
      const fbmbt::Hurst h(var_opt.hurst);
      std::ostringstream os;
      os << "replicate,r,t,n,value_direct,value_separated\n";
      for (std::size_t i = 0; i < var_opt.reps; ++i) {
        const std::uint64_t key = fbmbt::fold_seed(
            fbmbt::fold_seed(var_opt.seed, fbmbt::stream_tag::replicate), i);
        for (const int n : var_opt.levels) {
          const double t_max = *std::max_element(var_opt.times.begin(),
                                                 var_opt.times.end());
          const fbmbt::DyadicWalk walk = fbmbt::simulate_walk(
              fbmbt::DyadicLevel{n}, fbmbt::horizon_steps(n, t_max),
              fbmbt::fold_seed(
                  fbmbt::fold_seed(key, fbmbt::stream_tag::walk),
                  std::uint64_t(n)));
          const fbmbt::FgnWindow window = fbmbt::window_for_walk(
              h, walk,
              fbmbt::fold_seed(fbmbt::fold_seed(key, fbmbt::stream_tag::fgn),
                               std::uint64_t(n)));
          for (const double t : var_opt.times) {
            const fbmbt::CrossingCounts counts = fbmbt::count_crossings(
                walk, fbmbt::horizon_steps(n, t));
            for (const int r : var_opt.orders) {
              const auto direct =
                  fbmbt::hermite_variation_direct(r, t, window, walk);
              const auto separated =
                  fbmbt::hermite_variation_separated(r, t, window, counts);
              os << i << ',' << r << ',' << dump_number(t) << ',' << n << ','
                 << dump_number(direct.value) << ','
                 << dump_number(separated.value) << '\n';
            }
          }
        }
      }
      emit(var_opt.out, os.str());
      return 0;
    }

    if (sim_bmrs->parsed()) {
      std::ostringstream os;
      os << "replicate,t,p,m,value,conditional_variance\n";
      for (std::size_t i = 0; i < bmrs_sim_opt.reps; ++i) {
        const std::uint64_t key = fbmbt::fold_seed(
            fbmbt::fold_seed(bmrs_sim_opt.seed, fbmbt::stream_tag::replicate),
            i);
        for (std::size_t ti = 0; ti < bmrs_sim_opt.times.size(); ++ti) {
          const fbmbt::SceneryIntegral integral =
              fbmbt::simulate_scenery_integral(
                  bmrs_sim_opt.times[ti], bmrs_sim_opt.cutoff,
                  bmrs_sim_opt.refinement,
                  fbmbt::fold_seed(key, std::uint64_t(ti)));
          os << i << ',' << dump_number(integral.t) << ','
             << dump_number(integral.cutoff) << ',' << integral.refinement
             << ',' << dump_number(integral.value) << ','
             << dump_number(integral.conditional_variance) << '\n';
        }
      }
      emit(bmrs_sim_opt.out, os.str());
      return 0;
    }

    if (const_hermite->parsed()) {
      const fbmbt::HermiteExpansion expansion =
          fbmbt::power_to_hermite(hermite_opt.p);
      ordered_json j{{"p", expansion.power}, {"coeffs", expansion.coeffs}};
      emit(hermite_opt.out, j.dump(2) + "\n");
      return 0;
    }

    if (const_sigma->parsed()) {
      const fbmbt::SigmaConstant sigma = fbmbt::sigma_constant(
          sigma_opt.order, fbmbt::Hurst(sigma_opt.hurst), sigma_opt.tol);
      ordered_json j{{"r", sigma.order},
                     {"H", sigma.hurst},
                     {"sigma2", sigma.sigma2},
                     {"K", sigma.truncation},
                     {"tail_bound", sigma.tail_bound}};
      emit(sigma_opt.out, j.dump(2) + "\n");
      return 0;
    }

    if (verify_theorem->parsed()) {
      const auto mode = theorem_parity == "odd"
                            ? fbmbt::ExperimentMode::theorem_odd
                            : fbmbt::ExperimentMode::theorem_even;
      return finish_run(fbmbt::run_theorem_check(to_config(theorem_opt, mode)),
                        theorem_opt);
    }

    if (verify_corollary->parsed()) {
      const auto mode = corollary_parity == "odd"
                            ? fbmbt::ExperimentMode::corollary_odd
                            : fbmbt::ExperimentMode::corollary_even;
      return finish_run(
          fbmbt::run_corollary_check(to_config(corollary_opt, mode)),
          corollary_opt);
    }

    if (bmrs->parsed()) {
      fbmbt::ExperimentConfig config =
          to_config(bmrs_opt, fbmbt::ExperimentMode::bmrs_reference);
      config.bmrs_cutoff = bmrs_cutoff;
      config.bmrs_refinement = bmrs_refinement;
      return finish_run(fbmbt::run_bmrs_reference(config), bmrs_opt);
    }
  } catch (const std::invalid_argument& err) {
    std::cerr << "configuration error: " << err.what() << "\n";
    return 3;
  } catch (const std::domain_error& err) {
    std::cerr << "configuration error: " << err.what() << "\n";
    return 3;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  }
  return 0;
}
