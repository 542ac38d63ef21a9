#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "lcmavg/errors.hpp"
#include "lcmavg/euler_product.hpp"
#include "lcmavg/zeta.hpp"

namespace lcmavg {

struct ClosedFormResult {
  double value = 0.0;
  i64 prime_cutoff = 0;  // 0 when the value is a pure zeta expression
  double error_estimate = 0.0;
};

namespace detail {

// Product over primes of 1 + sum_j coeff_j * p^-expo_j, with the same
// adaptive cross-prime tail model as the kernel products. These polynomial
// factors carry no exponent truncation, so the per-prime tail is zero.
inline PrimeProductResult
polynomial_prime_product(const std::vector<std::pair<double, double>>& terms,
                         double tol, const EulerProductCaps& caps,
                         int workers) {
  auto local = [&terms](i64 p, double /*eps*/) {
    const double pd = static_cast<double>(p);
    double v = 1.0;
    for (const auto& [expo, coeff] : terms) v += coeff * std::pow(pd, -expo);
    LocalFactorResult res;
    res.prime = p;
    res.value = v;
    res.exponent_cutoff = 0;
    res.tail_estimate = 0.0;
    return res;
  };
  return adaptive_prime_product(local, tol, caps, workers);
}

inline ClosedFormResult zeta_prefactored_product(
    double prefactor, const std::vector<std::pair<double, double>>& terms,
    double tol, const EulerProductCaps& caps, int workers) {
  const PrimeProductResult prod = polynomial_prime_product(
      terms, tol / (2.0 * std::abs(prefactor)), caps, workers);
  ClosedFormResult out;
  out.value = prefactor * prod.value;
  out.prime_cutoff = prod.prime_cutoff;
  out.error_estimate =
      std::abs(prefactor) * prod.error_estimate + 1e-12 * std::abs(out.value);
  return out;
}

}  // namespace detail

// Constant for the lcm kernel at k = 3 and f(n) = n^r:
//   zeta(r+2) zeta(2r+3) * prod_p (1 - 3p^-2 + 2p^-3 + 2p^-(r+2)
//                                    - 3p^-(r+3) + p^-(r+5)).
inline ClosedFormResult closed_form_C3(double r, double tol = 1e-10,
                                       const EulerProductCaps& caps = {},
                                       int workers = 1) {
  if (!(r > -1.0)) throw DomainError("closed_form_C3: requires r > -1");
  const double prefactor = zeta(r + 2.0) * zeta(2.0 * r + 3.0);
  const std::vector<std::pair<double, double>> terms = {
      {2.0, -3.0}, {3.0, 2.0},      {r + 2.0, 2.0},
      {r + 3.0, -3.0}, {r + 5.0, 1.0},
  };
  return detail::zeta_prefactored_product(prefactor, terms, tol, caps, workers);
}

// Constant for the lcm kernel at k = 4 and f(n) = n^r:
//   zeta(r+2) zeta(2r+3) zeta(3r+4) times an 18-term polynomial product.
inline ClosedFormResult closed_form_C4(double r, double tol = 1e-10,
                                       const EulerProductCaps& caps = {},
                                       int workers = 1) {
  if (!(r > -1.0)) throw DomainError("closed_form_C4: requires r > -1");
  const double prefactor =
      zeta(r + 2.0) * zeta(2.0 * r + 3.0) * zeta(3.0 * r + 4.0);
  const std::vector<std::pair<double, double>> terms = {
      {2.0, -6.0},          {3.0, 8.0},           {4.0, -3.0},
      {r + 2.0, 5.0},       {r + 3.0, -12.0},     {r + 4.0, 6.0},
      {r + 5.0, 4.0},       {r + 6.0, -3.0},      {2.0 * r + 3.0, 3.0},
      {2.0 * r + 4.0, -4.0}, {2.0 * r + 5.0, -6.0}, {2.0 * r + 6.0, 12.0},
      {2.0 * r + 7.0, -5.0}, {3.0 * r + 5.0, 3.0},  {3.0 * r + 6.0, -8.0},
      {3.0 * r + 7.0, 6.0},  {3.0 * r + 9.0, -1.0},
  };
  return detail::zeta_prefactored_product(prefactor, terms, tol, caps, workers);
}

// Constants for the (lcm/gcd)^r kernel:
//   D_{r,2} = zeta(2r+2)/zeta(2),
//   D_{r,3} = C_{r,3} * zeta(3r+3)/zeta(2r+3),
//   D_{r,4} = C_{r,4} * zeta(4r+4)/zeta(3r+4).
inline ClosedFormResult closed_form_D(int k, double r, double tol = 1e-10,
                                      const EulerProductCaps& caps = {},
                                      int workers = 1) {
  if (k == 2) {
    if (!(r >= 0.0)) throw DomainError("closed_form_D: k=2 requires r >= 0");
    ClosedFormResult out;
    out.value = zeta(2.0 * r + 2.0) / zeta(2.0);
    out.error_estimate = 1e-12 * std::abs(out.value);
    return out;
  }
  if (k == 3 || k == 4) {
    if (!(r > 0.0))
      throw DomainError("closed_form_D: k=3,4 requires r > 0");
    ClosedFormResult base = (k == 3) ? closed_form_C3(r, tol, caps, workers)
                                     : closed_form_C4(r, tol, caps, workers);
    const double ratio = (k == 3)
                             ? zeta(3.0 * r + 3.0) / zeta(2.0 * r + 3.0)
                             : zeta(4.0 * r + 4.0) / zeta(3.0 * r + 4.0);
    base.value *= ratio;
    base.error_estimate =
        base.error_estimate * std::abs(ratio) + 1e-12 * std::abs(base.value);
    return base;
  }
  throw ConfigError("closed_form_D: k must be one of 2, 3, 4");
}

// k = 2 lcm-kernel constants with dedicated closed forms:
//   sigma: zeta(2)^2 zeta(3) * prod_p (1 - p^-2 - 2p^-3 + 2p^-4)
//   phi:   zeta(3)           * prod_p (1 - 3p^-2 + 2p^-3 - p^-4 + 2p^-5 - p^-6)
//   id_r:  zeta(r+2)/zeta(2)
//
// The sigma form follows from the local identity
//   (1-u)^2 * sum_{a,b} sigma(p^max(a,b)) u^(2(a+b))
//     = (2u^2 + 2u + 1) / ((1+u)^2 (1-u^3))
//     = (1 - u^2 - 2u^3 + 2u^4) / ((1-u^2)^2 (1-u^3)),
// u = 1/p, checked termwise against the raw double series.
inline ClosedFormResult closed_form_k2(const std::string& f_name, double r,
                                       double tol = 1e-10,
                                       const EulerProductCaps& caps = {},
                                       int workers = 1) {
  if (f_name == "sigma" || f_name == "sigma_r") {
    const std::vector<std::pair<double, double>> terms = {
        {2.0, -1.0}, {3.0, -2.0}, {4.0, 2.0}};
    const double z2 = zeta(2.0);
    return detail::zeta_prefactored_product(z2 * z2 * zeta(3.0), terms, tol,
                                            caps, workers);
  }
  if (f_name == "phi" || f_name == "phi_r") {
    const std::vector<std::pair<double, double>> terms = {
        {2.0, -3.0}, {3.0, 2.0}, {4.0, -1.0}, {5.0, 2.0}, {6.0, -1.0}};
    return detail::zeta_prefactored_product(zeta(3.0), terms, tol, caps,
                                            workers);
  }
  if (f_name == "id" || f_name == "id_r") {
    if (!(r > -1.0)) throw DomainError("closed_form_k2: id requires r > -1");
    ClosedFormResult out;
    out.value = zeta(r + 2.0) / zeta(2.0);
    out.error_estimate = 1e-12 * std::abs(out.value);
    return out;
  }
  throw ConfigError("closed_form_k2: no closed form for function " + f_name);
}

}  // namespace lcmavg
