#include "fbmbt/hermite.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace fbmbt {

namespace {

constexpr int kMaxPower = 60;

// factorial[n] = n!, exact in double through 22! and correctly rounded after.
const std::array<double, 2 * kMaxPower + 2>& factorial_table() {
  static const auto table = [] {
    std::array<double, 2 * kMaxPower + 2> f{};
    f[0] = 1.0;
    for (std::size_t n = 1; n < f.size(); ++n) f[n] = f[n - 1] * double(n);
    return f;
  }();
  return table;
}

// odd_double_factorial[q] = (2q-1)!! = E[N^{2q}].
const std::array<double, 2 * kMaxPower + 2>& double_factorial_table() {
  static const auto table = [] {
    std::array<double, 2 * kMaxPower + 2> df{};
    df[0] = 1.0;
    for (std::size_t q = 1; q < df.size(); ++q)
      df[q] = df[q - 1] * double(2 * q - 1);
    return df;
  }();
  return table;
}

double factorial(int n) { return factorial_table()[std::size_t(n)]; }

// E[N^q] for integer q >= 0: (q-1)!! for even q, 0 for odd.
double gaussian_moment(int q) {
  if (q % 2 != 0) return 0.0;
  return double_factorial_table()[std::size_t(q / 2)];
}

}  // namespace

double hermite_eval(int order, double x) {
  if (order < 0) throw std::invalid_argument("hermite_eval: order must be >= 0");
  if (order == 0) return 1.0;
  double prev = 1.0;  // H_0
  double cur = x;     // H_1
  for (int k = 1; k < order; ++k) {
    const double next = x * cur - double(k) * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

HermiteExpansion power_to_hermite(int p) {
  if (p < 0) throw std::invalid_argument("power_to_hermite: p must be >= 0");
  if (p > kMaxPower)
    throw std::domain_error(
        "power_to_hermite: p > " + std::to_string(kMaxPower) +
        " exhausts double precision in the moment sums");
  HermiteExpansion out{p, std::vector<double>(std::size_t(p) + 1, 0.0)};
  for (int k = p % 2; k <= p; k += 2) {
    // a_{p,k} = sum_l (-1)^l E[N^{p+k-2l}] / (l! (k-2l)! 2^l)
    double sum = 0.0;
    for (int l = 0; 2 * l <= k; ++l) {
      const double term = gaussian_moment(p + k - 2 * l) /
                          (factorial(l) * factorial(k - 2 * l) *
                           std::exp2(double(l)));
      sum += (l % 2 == 0) ? term : -term;
    }
    out.coeffs[std::size_t(k)] = sum;
  }
  return out;
}

double odd_power_coeff(int r, int k) {
  if (r < 1 || k < 1 || k > r)
    throw std::out_of_range("odd_power_coeff: need 1 <= k <= r");
  if (2 * r - 1 > kMaxPower)
    throw std::domain_error("odd_power_coeff: power 2r-1 exceeds the cap");
  // a_{r,k} = sum_{l=0}^{k-1} (-1)^l (2(r+k-l-1))! /
  //           ( l! (2(k-l)-1)! (r+k-l-1)! 2^{r+k-1} )
  double sum = 0.0;
  for (int l = 0; l <= k - 1; ++l) {
    const int q = r + k - l - 1;
    const double term = factorial(2 * q) /
                        (factorial(l) * factorial(2 * (k - l) - 1) *
                         factorial(q) * std::exp2(double(r + k - 1)));
    sum += (l % 2 == 0) ? term : -term;
  }
  return sum;
}

double even_power_coeff(int r, int k) {
  if (r < 1 || k < 0 || k > r)
    throw std::out_of_range("even_power_coeff: need 0 <= k <= r");
  if (2 * r > kMaxPower)
    throw std::domain_error("even_power_coeff: power 2r exceeds the cap");
  // b_{r,k} = sum_{l=0}^{k} (-1)^l (2(r+k-l))! /
  //           ( l! (2(k-l))! (r+k-l)! 2^{r+k} )
  double sum = 0.0;
  for (int l = 0; l <= k; ++l) {
    const int q = r + k - l;
    const double term = factorial(2 * q) /
                        (factorial(l) * factorial(2 * (k - l)) *
                         factorial(q) * std::exp2(double(r + k)));
    sum += (l % 2 == 0) ? term : -term;
  }
  return sum;
}

double gaussian_even_moment(int r) {
  if (r < 0 || r > 30)
    throw std::domain_error("gaussian_even_moment: need 0 <= r <= 30");
  return double_factorial_table()[std::size_t(r)];
}

double gaussian_abs_moment(double q) {
  if (!(q > -1.0))
    throw std::invalid_argument("gaussian_abs_moment: need q > -1");
  return std::exp2(q / 2.0) * std::tgamma((q + 1.0) / 2.0) /
         std::sqrt(std::numbers::pi);
}

}  // namespace fbmbt
