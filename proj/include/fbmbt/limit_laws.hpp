#pragma once

// The two limit laws the variation statistics converge to, and their
// constants: sigma_r (Hermite-variance series), Brownian motion time-changed
// by |Y| (odd orders), and the Brownian-scenery integral int L_t^x dB_x
// (even orders), plus the scale-mixture CDF used for distributional tests.

#include <cstdint>
#include <span>
#include <vector>

#include "fbmbt/dyadic.hpp"
#include "fbmbt/gaussian.hpp"

namespace fbmbt {

// sigma_r^2 = r! * sum_{a in Z} rho(a)^r.  Converges iff H < 1 - 1/(2r) or
// H == 1/2 (where rho degenerates to the Kronecker delta and the value is
// exactly r!); throws std::domain_error otherwise, citing the condition.
//
// The series is summed to |a| <= truncation and completed with an
// Euler-Maclaurin tail using rho(a) = H(2H-1) a^{2H-2} (1 + eta(a)),
// |eta(a)| <= 1/(2(a^2-1)); tail_bound certifies everything not summed or
// corrected (sigma2 changes by at most tail_bound under any larger
// truncation).
struct SigmaConstant {
  int order;
  double hurst;
  double sigma2;        // max(series value, 0); roundoff can graze below 0
  double sigma;         // sqrt(sigma2)
  std::int64_t truncation;
  double tail_bound;
};
SigmaConstant sigma_constant(int order, Hurst h, double tol);

// B(Y_t) for increasing times: Y Brownian, B an independent two-sided
// Brownian motion evaluated at the realized Y values.  Exact in law.
// Folds {stream_tag::b_of_y_time, b_of_y_pos, b_of_y_neg}.
std::vector<double> simulate_b_of_y(std::span<const double> times,
                                    std::uint64_t seed);

// Riemann-Ito discretisation of int L_t^x dB_x: L is the top-hat occupation
// estimate of the local time of one Brownian path over [0, t], evaluated on
// the grid x_j = j 2^{-m/2}, |x_j| <= cutoff; B-increments are fresh
// N(0, 2^{-m/2}).  conditional_variance = sum_j L_j^2 2^{-m/2} is the exact
// variance of `value` given the path.  Folds {stream_tag::scenery_path,
// scenery_noise}.
struct SceneryIntegral {
  double t;
  double cutoff;
  int refinement;         // m
  double value;
  double conditional_variance;
};
SceneryIntegral simulate_scenery_integral(double t, double cutoff,
                                          int refinement, std::uint64_t seed,
                                          double path_mesh = 0x1p-16,
                                          double bandwidth_factor = 10.0);

// CDF of sigma * B(Y_t) (equivalently sigma * sqrt(|Y_t|) * N):
//   F(z) = int_0^inf Phi(z / (sigma sqrt(y))) * 2 phi_t(y) dy,
// by adaptive Simpson quadrature to ~1e-8 absolute.  F(0) = 1/2 and
// F(-z) = 1 - F(z) hold exactly.
double mixture_cdf_odd(double z, double t, double sigma);

// MC oracle for E[ int (L_1^x)^2 dx ] from simple-random-walk visit counts:
// one replicate is sum_k count_k^2 * N^{-3/2} over an N-step walk.  Bias is
// O(N^{-1/2}); std_error is the empirical SE over replicates.  The
// experiment layer scales by t^{3/2}.  Folds {stream_tag::oracle}.
struct OracleEstimate {
  double value;
  double std_error;
  std::size_t walk_steps;
  std::size_t replicates;
};
OracleEstimate estimate_sq_local_time_integral(std::size_t walk_steps,
                                               std::size_t replicates,
                                               std::uint64_t seed);

}  // namespace fbmbt
