#include "fbmbt/limit_laws.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "fbmbt/rng.hpp"

namespace fbmbt {

namespace {

double std_normal_cdf(double x) {
  return 0.5 * std::erfc(-x * std::numbers::sqrt2 / 2.0);
}

// Adaptive Simpson with an absolute tolerance.
template <typename F>
double simpson_recurse(const F& f, double a, double b, double fa, double fm,
                       double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
    return left + right + delta / 15.0;
  return simpson_recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

template <typename F>
double adaptive_simpson(const F& f, double a, double b, double tol) {
  const double m = 0.5 * (a + b);
  const double fa = f(a);
  const double fm = f(m);
  const double fb = f(b);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_recurse(f, a, b, fa, fm, fb, whole, tol, 48);
}

double factorial_as_double(int n) {
  double acc = 1.0;
  for (int i = 2; i <= n; ++i) acc *= i;
  return acc;
}

}  // namespace

SigmaConstant sigma_constant(int order, Hurst h, double tol) {
  if (order < 1) throw std::invalid_argument("order must be >= 1");
  if (order > 30) throw std::invalid_argument("order must be <= 30");
  if (!(tol > 0.0)) throw std::invalid_argument("tol must be > 0");

  const double r_fact = factorial_as_double(order);
  if (h.value == 0.5)
    return {order, h.value, r_fact, std::sqrt(r_fact), 0, 0.0};

  // rho(a)^order ~ c^order a^{-s}; the series needs s > 1.
  const double s = order * (2.0 - 2.0 * h.value);
  if (!(s > 1.0)) {
    std::ostringstream msg;
    msg << "sigma_" << order << "^2 diverges at H = " << h.value
        << ": needs H < " << 1.0 - 0.5 / order << " or H == 0.5";
    throw std::domain_error(msg.str());
  }
  const double c = h.value * (2.0 * h.value - 1.0);
  const double abs_c_pow = std::pow(std::abs(c), order);

  // Certified bound on |true tail - Euler-Maclaurin tail| for truncation k:
  // the eta correction contributes at most ~0.51 r zeta_{>k}(s+2) per side and
  // the dropped Euler-Maclaurin term is s(s+1)(s+2)/720 k^{-s-3}.
  const auto residual = [&](double k) {
    const double correction =
        1.02 * 0.51 * order * std::pow(k, -(s + 1.0)) / (s + 1.0);
    const double em_rest =
        s * (s + 1.0) * (s + 2.0) / 720.0 * std::pow(k, -s - 3.0);
    return r_fact * 2.0 * abs_c_pow * (correction + em_rest);
  };

  std::int64_t trunc = 1 << 16;
  while (residual(double(trunc)) > tol && trunc < (1 << 24)) trunc *= 4;

  CompensatedSum partial;
  for (std::int64_t a = 1; a <= trunc; ++a) {
    double term = 1.0;
    const double r_a = rho(h, a);
    for (int i = 0; i < order; ++i) term *= r_a;
    partial.add(term);
  }
  const double k = double(trunc);
  const double em_tail =
      std::pow(c, order) * (std::pow(k, 1.0 - s) / (s - 1.0) -
                            0.5 * std::pow(k, -s) +
                            s / 12.0 * std::pow(k, -s - 1.0));

  const double sigma2_raw = r_fact * (1.0 + 2.0 * (partial.value() + em_tail));
  const double sigma2 = std::max(sigma2_raw, 0.0);
  return {order, h.value, sigma2, std::sqrt(sigma2), trunc, residual(k)};
}

std::vector<double> simulate_b_of_y(std::span<const double> times,
                                    std::uint64_t seed) {
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!std::isfinite(times[i]) || times[i] < 0.0)
      throw std::invalid_argument("times must be finite and >= 0");
    if (i > 0 && !(times[i - 1] < times[i]))
      throw std::invalid_argument("times must be strictly increasing");
  }
  if (times.empty()) return {};

  // Y at the requested times.
  std::vector<double> y(times.size());
  Rng time_rng = Rng::substream(seed, {stream_tag::b_of_y_time});
  double prev_t = 0.0;
  double prev_y = 0.0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    prev_y += std::sqrt(times[i] - prev_t) * time_rng.gaussian();
    prev_t = times[i];
    y[i] = prev_y;
  }

  // B at the realized positions, anchored at B(0) = 0 and extended with
  // independent increments on each side of the origin.
  std::vector<double> sorted(y);
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  std::vector<double> b(sorted.size());
  const auto first_pos = std::size_t(
      std::lower_bound(sorted.begin(), sorted.end(), 0.0) - sorted.begin());
  {
    Rng pos_rng = Rng::substream(seed, {stream_tag::b_of_y_pos});
    double x = 0.0, val = 0.0;
    for (std::size_t i = first_pos; i < sorted.size(); ++i) {
      val += std::sqrt(sorted[i] - x) * pos_rng.gaussian();
      x = sorted[i];
      b[i] = val;
    }
  }
  {
    Rng neg_rng = Rng::substream(seed, {stream_tag::b_of_y_neg});
    double x = 0.0, val = 0.0;
    for (std::size_t i = first_pos; i-- > 0;) {
      val += std::sqrt(x - sorted[i]) * neg_rng.gaussian();
      x = sorted[i];
      b[i] = val;
    }
  }

  std::vector<double> out(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    const auto at = std::size_t(
        std::lower_bound(sorted.begin(), sorted.end(), y[i]) - sorted.begin());
    out[i] = b[at];
  }
  return out;
}

SceneryIntegral simulate_scenery_integral(double t, double cutoff,
                                          int refinement, std::uint64_t seed,
                                          double path_mesh,
                                          double bandwidth_factor) {
  if (!(t > 0.0)) throw std::invalid_argument("t must be > 0");
  if (!(cutoff > 0.0)) throw std::invalid_argument("cutoff must be > 0");
  if (refinement < 1) throw std::invalid_argument("refinement must be >= 1");
  if (!(path_mesh > 0.0))
    throw std::invalid_argument("path_mesh must be > 0");
  if (!(bandwidth_factor > 0.0))
    throw std::invalid_argument("bandwidth_factor must be > 0");

  const double h = std::exp2(-0.5 * refinement);
  const auto half_cells = std::int64_t(std::floor(cutoff / h));
  const BrownianPath path = simulate_brownian(
      t, path_mesh, fold_seed(seed, stream_tag::scenery_path));

  std::vector<double> grid;
  grid.reserve(std::size_t(2 * half_cells + 1));
  for (std::int64_t j = -half_cells; j <= half_cells; ++j)
    grid.push_back(double(j) * h);
  const double bandwidth = bandwidth_factor * std::sqrt(path_mesh);
  const LocalTimeProfile profile = occupation_local_time(path, grid, bandwidth);

  Rng noise = Rng::substream(seed, {stream_tag::scenery_noise});
  const double sqrt_h = std::sqrt(h);
  CompensatedSum integral;
  CompensatedSum second_moment;
  for (const double value : profile.value) {
    integral.add(value * sqrt_h * noise.gaussian());
    second_moment.add(value * value * h);
  }
  return {t, cutoff, refinement, integral.value(), second_moment.value()};
}

double mixture_cdf_odd(double z, double t, double sigma) {
  if (!(t > 0.0)) throw std::invalid_argument("t must be > 0");
  if (!(sigma >= 0.0)) throw std::invalid_argument("sigma must be >= 0");
  if (z == 0.0) return 0.5;
  if (z < 0.0) return 1.0 - mixture_cdf_odd(-z, t, sigma);
  if (sigma == 0.0) return 1.0;  // degenerate point mass at 0

  // F(z) = int_0^inf Phi(z / (sigma sqrt(y))) * 2 phi_t(y) dy with
  // phi_t the N(0, t) density; substitute y = sqrt(t) u.
  const double scale = sigma * std::pow(t, 0.25);
  const double norm = 2.0 / std::sqrt(2.0 * std::numbers::pi);
  const auto integrand = [&](double u) {
    if (u <= 0.0) return norm;  // Phi(+inf) limit
    return std_normal_cdf(z / (scale * std::sqrt(u))) * norm *
           std::exp(-0.5 * u * u);
  };
  const double value = adaptive_simpson(integrand, 0.0, 12.0, 1e-9);
  return std::min(value, 1.0);
}

OracleEstimate estimate_sq_local_time_integral(std::size_t walk_steps,
                                               std::size_t replicates,
                                               std::uint64_t seed) {
  if (walk_steps == 0) throw std::invalid_argument("walk_steps must be > 0");
  if (replicates == 0) throw std::invalid_argument("replicates must be > 0");

  const auto span =
      std::int64_t(6.0 * std::sqrt(double(walk_steps))) + 16;
  std::vector<std::uint32_t> visits(std::size_t(2 * span + 1), 0);
  const double scale = std::pow(double(walk_steps), -1.5);

  CompensatedSum mean_acc;
  CompensatedSum sq_acc;
  for (std::size_t rep = 0; rep < replicates; ++rep) {
    std::fill(visits.begin(), visits.end(), 0);
    Rng rng = Rng::substream(seed, {stream_tag::oracle, rep});
    std::int64_t pos = 0;
    std::uint64_t bits = 0;
    bool overflow = false;
    for (std::size_t k = 0; k < walk_steps; ++k) {
      if (k % 64 == 0) bits = rng.next_u64();
      pos += (bits & 1) ? 1 : -1;
      bits >>= 1;
      if (pos < -span || pos > span) {
        overflow = true;
        break;
      }
      ++visits[std::size_t(pos + span)];
    }
    if (overflow) {
      // A walk beyond 6 sqrt(N) is a ~1e-8 event; redo it from a fresh
      // stream rather than widening every replicate's table.
      std::fill(visits.begin(), visits.end(), 0);
      Rng retry = Rng::substream(seed, {stream_tag::oracle, rep, 1});
      pos = 0;
      for (std::size_t k = 0; k < walk_steps; ++k) {
        if (k % 64 == 0) bits = retry.next_u64();
        pos += (bits & 1) ? 1 : -1;
        bits >>= 1;
        pos = std::clamp<std::int64_t>(pos, -span, span);
        ++visits[std::size_t(pos + span)];
      }
    }
    std::uint64_t sum_sq = 0;
    for (const std::uint32_t c : visits)
      sum_sq += std::uint64_t(c) * std::uint64_t(c);
    const double value = double(sum_sq) * scale;
    mean_acc.add(value);
    sq_acc.add(value * value);
  }

  const double m = double(replicates);
  const double mean = mean_acc.value() / m;
  const double var =
      std::max(0.0, (sq_acc.value() / m - mean * mean) * m / std::max(m - 1.0, 1.0));
  return {mean, std::sqrt(var / m), walk_steps, replicates};
}

}  // namespace fbmbt
