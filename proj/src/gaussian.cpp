#include "fbmbt/gaussian.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <iostream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "fft_detail.hpp"

namespace fbmbt {

Hurst::Hurst(double h) : value(h) {
  if (!(h > 0.0 && h < 1.0)) {
    std::ostringstream msg;
    msg << "Hurst index must lie in (0, 1), got " << h;
    throw std::invalid_argument(msg.str());
  }
}

double rho(Hurst h, std::int64_t k) {
  const double a = 2.0 * h.value;
  const std::uint64_t m = std::uint64_t(k < 0 ? -k : k);
  if (m == 0) return 1.0;
  if (m == 1) return 0.5 * (std::pow(2.0, a) - 2.0);

  // rho(k) = k^a * sum_{j>=1} C(a, 2j) k^{-2j}: the even binomial expansion
  // of the second difference.  Terms decay at least like (1/k^2)^j and share
  // a dominant sign, so no cancellation; exact 0 at H = 1/2 (C(1, 2j) = 0).
  const double u2 = 1.0 / (double(m) * double(m));
  double coeff = a * (a - 1.0) / 2.0;  // C(a, 2)
  double upow = u2;
  double sum = 0.0;
  for (int j = 1; j < 80; ++j) {
    const double term = coeff * upow;
    sum += term;
    if (std::abs(term) <= 1e-18 * std::abs(sum)) break;
    coeff *= (a - 2.0 * j) * (a - 2.0 * j - 1.0) /
             ((2.0 * j + 1.0) * (2.0 * j + 2.0));
    upow *= u2;
  }
  return std::pow(double(m), a) * sum;
}

namespace {

FgnPath sample_fgn_cholesky(Hurst h, std::size_t m, std::uint64_t seed) {
  // Fallback for a defective embedding: dense Toeplitz Cholesky, O(m^3).
  Eigen::MatrixXd cov(m, m);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j <= i; ++j)
      cov(i, j) = cov(j, i) = rho(h, std::int64_t(i) - std::int64_t(j));
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) {
    cov.diagonal().array() += 1e-10;
    llt.compute(cov);
    if (llt.info() != Eigen::Success)
      throw std::runtime_error("fGn covariance not positive definite");
  }
  Rng rng = Rng::substream(seed, {stream_tag::fgn_fallback});
  Eigen::VectorXd z(m);
  rng.fill_gaussian({z.data(), m});
  Eigen::VectorXd x = llt.matrixL() * z;
  FgnPath path{h, seed, std::vector<double>(m)};
  Eigen::VectorXd::Map(path.values.data(), m) = x;
  return path;
}

}  // namespace

FgnPath sample_fgn(Hurst h, std::size_t m, std::uint64_t seed,
                   FgnDiagnostics* diag) {
  if (m == 0) throw std::invalid_argument("sample_fgn: m must be >= 1");

  // Circulant embedding of size M = 2^ceil(lg 2m) >= 2m: first row
  // c_j = rho(min(j, M-j)).  For fGn every such symmetric embedding is
  // nonnegative definite, so the sample is exact in law.
  const std::size_t M = std::bit_ceil(std::max<std::size_t>(2 * m, 16));
  std::vector<std::complex<double>> buf(M);
  for (std::size_t j = 0; j < M; ++j) {
    const std::size_t lag = std::min(j, M - j);
    buf[j] = rho(h, std::int64_t(lag));
  }
  detail::fft_inplace(buf, /*inverse=*/false);

  double min_eig = std::numeric_limits<double>::infinity();
  double max_eig = 0.0;
  for (const auto& v : buf) {
    min_eig = std::min(min_eig, v.real());
    max_eig = std::max(max_eig, v.real());
  }
  if (diag != nullptr) {
    diag->min_eigenvalue = min_eig;
    diag->embedding_size = M;
    diag->used_cholesky_fallback = false;
  }
  if (min_eig < -1e-10 * std::max(max_eig, 1.0)) {
    std::cerr << "fbmbt: circulant embedding defective (min eigenvalue "
              << min_eig << ", size " << M
              << "); falling back to dense Cholesky\n";
    if (diag != nullptr) diag->used_cholesky_fallback = true;
    return sample_fgn_cholesky(h, m, seed);
  }

  // Hermitian Gaussian spectrum: b_k = sqrt(lambda_k) V_k with V_0, V_{M/2}
  // real standard normal, V_k = (N1 + i N2)/sqrt(2) for 0 < k < M/2, and
  // V_{M-k} = conj(V_k).  Then Re(IDFT(b))/sqrt(M) has covariance c.
  std::vector<double> lambda(M / 2 + 1);
  for (std::size_t k = 0; k <= M / 2; ++k)
    lambda[k] = std::sqrt(std::max(buf[k].real(), 0.0));

  Rng rng = Rng::substream(seed, {stream_tag::fgn});
  buf[0] = lambda[0] * rng.gaussian();
  const double inv_sqrt2 = std::numbers::sqrt2 / 2.0;
  for (std::size_t k = 1; k < M / 2; ++k) {
    const double n1 = rng.gaussian();
    const double n2 = rng.gaussian();
    const std::complex<double> v(n1 * inv_sqrt2, n2 * inv_sqrt2);
    buf[k] = lambda[k] * v;
    buf[M - k] = std::conj(buf[k]);
  }
  buf[M / 2] = lambda[M / 2] * rng.gaussian();

  detail::fft_inplace(buf, /*inverse=*/true);
  const double scale = 1.0 / std::sqrt(double(M));
  FgnPath path{h, seed, std::vector<double>(m)};
  for (std::size_t i = 0; i < m; ++i) path.values[i] = buf[i].real() * scale;
  return path;
}

FbmGrid fbm_grid_from_fgn(const FgnPath& path, double step) {
  if (!(step > 0.0)) throw std::invalid_argument("fbm grid: step must be > 0");
  const double scale = std::pow(step, path.hurst.value);
  FbmGrid grid{path.hurst, step, 0,
               std::vector<double>(path.values.size() + 1)};
  grid.values[0] = 0.0;
  CompensatedSum sum;
  for (std::size_t j = 0; j < path.values.size(); ++j) {
    sum.add(path.values[j]);
    grid.values[j + 1] = scale * sum.value();
  }
  return grid;
}

FbmGrid two_sided_fbm(Hurst h, std::int64_t half_width, double step,
                      std::uint64_t seed) {
  if (half_width <= 0)
    throw std::invalid_argument("two_sided_fbm: empty grid (half_width <= 0)");
  if (!(step > 0.0))
    throw std::invalid_argument("two_sided_fbm: step must be > 0");

  // One stationary sequence over the doubled window; re-anchoring the
  // partial sums at the centre leaves increments untouched, so the result is
  // exact two-sided fBm with X(0) = 0.
  const FgnPath path = sample_fgn(h, std::size_t(2 * half_width), seed);
  const double scale = std::pow(step, h.value);
  const std::size_t size = std::size_t(2 * half_width) + 1;
  std::vector<double> partial(size);
  partial[0] = 0.0;
  CompensatedSum sum;
  for (std::size_t j = 1; j < size; ++j) {
    sum.add(path.values[j - 1]);
    partial[j] = sum.value();
  }
  FbmGrid grid{h, step, -half_width, std::vector<double>(size)};
  const double anchor = partial[std::size_t(half_width)];
  for (std::size_t i = 0; i < size; ++i)
    grid.values[i] = scale * (partial[i] - anchor);
  grid.values[std::size_t(half_width)] = 0.0;
  return grid;
}

PointSet::PointSet(std::vector<double> pts) : points(std::move(pts)) {
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!std::isfinite(points[i]))
      throw std::invalid_argument("PointSet: points must be finite");
    if (i > 0 && !(points[i - 1] < points[i]))
      throw std::invalid_argument(
          "PointSet: points must be strictly increasing");
  }
}

std::vector<double> fbm_at_points(Hurst h, const PointSet& pts,
                                  std::uint64_t seed, std::size_t cap) {
  const auto& p = pts.points;
  if (p.size() > cap) {
    std::ostringstream msg;
    msg << "fbm_at_points: " << p.size() << " points exceed the cap of "
        << cap << " (dense Cholesky is cubic; raise the cap deliberately)";
    throw std::invalid_argument(msg.str());
  }
  std::vector<std::size_t> nz;  // indices of nonzero points; X(0) = 0 exactly
  nz.reserve(p.size());
  for (std::size_t i = 0; i < p.size(); ++i)
    if (p[i] != 0.0) nz.push_back(i);

  std::vector<double> out(p.size(), 0.0);
  if (nz.empty()) return out;

  const double a = 2.0 * h.value;
  const auto n = Eigen::Index(nz.size());
  Eigen::MatrixXd cov(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double s = p[nz[std::size_t(i)]];
    for (Eigen::Index j = 0; j <= i; ++j) {
      const double t = p[nz[std::size_t(j)]];
      cov(i, j) = cov(j, i) =
          0.5 * (std::pow(std::abs(s), a) + std::pow(std::abs(t), a) -
                 std::pow(std::abs(t - s), a));
    }
  }

  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) {
    cov.diagonal().array() += 1e-12 * cov.diagonal().maxCoeff();
    llt.compute(cov);
    if (llt.info() != Eigen::Success) {
      // Name the offending (nearest) pair so the caller can thin the set.
      std::size_t bi = 0, bj = 1;
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t i = 1; i < nz.size(); ++i) {
        const double gap = std::abs(p[nz[i]] - p[nz[i - 1]]);
        if (gap < best) {
          best = gap;
          bi = nz[i - 1];
          bj = nz[i];
        }
      }
      std::ostringstream msg;
      msg << "fbm_at_points: covariance not positive definite after 1e-12 "
             "jitter; closest points "
          << p[bi] << " and " << p[bj] << " (gap " << best << ")";
      throw std::runtime_error(msg.str());
    }
  }

  Rng rng = Rng::substream(seed, {stream_tag::points});
  Eigen::VectorXd z(n);
  rng.fill_gaussian({z.data(), std::size_t(n)});
  const Eigen::VectorXd x = llt.matrixL() * z;
  for (Eigen::Index i = 0; i < n; ++i) out[nz[std::size_t(i)]] = x(i);
  return out;
}

FgnWindow sample_fgn_window(Hurst h, std::int64_t half_width,
                            std::uint64_t seed) {
  if (half_width <= 0)
    throw std::invalid_argument("sample_fgn_window: half_width must be >= 1");
  return FgnWindow{sample_fgn(h, std::size_t(2 * half_width), seed),
                   half_width};
}

}  // namespace fbmbt
