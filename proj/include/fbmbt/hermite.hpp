#pragma once

// Probabilists' Hermite polynomials and the coefficient tables used by the
// power-variation statistics.
//
// H_0 = 1, H_1 = x, H_{k+1} = x H_k - k H_{k-1}.  Monomials expand as
//   x^p = sum_k a_{p,k} H_k(x),   a_{p,k} = E[N^p H_k(N)] / k!,
// with N standard normal; a_{p,k} = 0 unless p and k have equal parity.

#include <vector>

namespace fbmbt {

// H_order(x) by the three-term recurrence.
double hermite_eval(int order, double x);

// Coefficients a_{p,k}, k = 0..p, of x^p in the Hermite basis.  Evaluated as
//   a_{p,k} = sum_l (-1)^l (p+k-2l-1)!! / (l! (k-2l)! 2^l)
// over l with p+k-2l even; capped at p <= 60 (beyond that the alternating
// double factorials exhaust double precision).
struct HermiteExpansion {
  int power;
  std::vector<double> coeffs;  // coeffs[k] multiplies H_k
};
HermiteExpansion power_to_hermite(int p);

// Closed forms for the odd/even monomial coefficients used by the power
// variations: odd_power_coeff(r, k) = a_{2r-1, 2k-1} for 1 <= k <= r,
// even_power_coeff(r, k) = a_{2r, 2k} for 0 <= k <= r.  Both match
// power_to_hermite to roundoff; even_power_coeff(r, 0) = E[N^{2r}].
double odd_power_coeff(int r, int k);
double even_power_coeff(int r, int k);

// E[N^{2r}] = (2r)! / (2^r r!) = (2r-1)!!, r <= 30.
double gaussian_even_moment(int r);

// E|N|^q = 2^{q/2} Gamma((q+1)/2) / sqrt(pi), q > -1.
double gaussian_abs_moment(double q);

}  // namespace fbmbt
