#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "lcmavg/errors.hpp"
#include "lcmavg/multiplicative.hpp"

namespace lcmavg {

// Euler factor of one prime for the k-tuple exponent series, truncated at a
// maximal exponent V, together with a bound on the omitted part (already
// scaled into value units, i.e. including the (1-1/p)^k multiplier).
struct LocalFactorResult {
  i64 prime = 0;
  double value = 0.0;
  int exponent_cutoff = 0;
  double tail_estimate = 0.0;
};

namespace detail {

inline std::vector<double> binomials(int k) {
  std::vector<double> c(static_cast<size_t>(k) + 1, 0.0);
  c[0] = 1.0;
  for (int j = 1; j <= k; ++j)
    c[static_cast<size_t>(j)] =
        c[static_cast<size_t>(j - 1)] * (k - j + 1) / j;
  return c;
}

// Upper bound on |f(p^m)| / p^(rm) near this prime; used for tail bounds.
inline double local_c3(const MultiplicativeFunction& f, i64 p, int scan_to) {
  double c = 1.0;
  for (int m = 1; m <= scan_to; ++m)
    c = std::max(c, std::abs(f.scaled_pp(p, m)));
  return 1.25 * c;
}

// Geometric bound on the terms omitted past exponent V. Every tuple with
// max(nu) = m > V contributes at most C3 * W * u^m after scaling, where W
// collects the multinomial spread of the remaining coordinates.
inline double exponent_tail_bound(double c3, int k, double u, double t,
                                  int V) {
  const double sigma_inf = 1.0 / (1.0 - t);
  const double wbar =
      std::pow(1.0 + sigma_inf, k) - std::pow(sigma_inf, k);
  return std::pow(1.0 - u, k - 1) * c3 * wbar * std::pow(u, V + 1);
}

}  // namespace detail

// Smallest exponent cutoff V whose tail bound is below eps (clamped to
// [1, cap]).
inline int choose_exponent_cutoff(const MultiplicativeFunction& f, int k,
                                  i64 p, double eps, int cap = 64,
                                  double c3 = 0.0) {
  const double r = f.r();
  const double u = 1.0 / static_cast<double>(p);
  const double t = std::pow(u, r + 1.0);
  if (!(t < 1.0)) throw DomainError("exponent cutoff: requires r > -1");
  if (c3 <= 0.0) c3 = detail::local_c3(f, p, 12);
  const double sigma_inf = 1.0 / (1.0 - t);
  const double prefactor = std::pow(1.0 - u, k - 1) * c3 *
                           (std::pow(1.0 + sigma_inf, k) -
                            std::pow(sigma_inf, k));
  // Solve prefactor * u^(V+1) <= eps for the smallest V.
  if (!(prefactor * u > eps)) return 1;
  int v = static_cast<int>(std::ceil(std::log(prefactor / eps) /
                                     std::log(static_cast<double>(p)))) -
          1;
  return std::clamp(v, 1, cap);
}

// Local factor of the lcm-of-the-tuple kernel:
//
//   (1 - 1/p)^k * sum_{m=0..V} f(p^m) * (sigma_m^k - sigma_{m-1}^k),
//   sigma_m = sum_{i=0..m} t^i,  t = p^-(r+1),  sigma_{-1} = 0.
//
// Evaluated in the overflow-free form f(p^m)*(...) = rho_m * W_m * u^m with
// rho_m = f(p^m)/p^(rm) and
// W_m = sum_{j=1..k} C(k,j) sigma_{m-1}^(k-j) t^(m(j-1)).
inline LocalFactorResult local_factor_lcm(const MultiplicativeFunction& f,
                                          int k, i64 p, int V,
                                          double c3 = 0.0) {
  if (k < 2) throw ConfigError("local_factor_lcm: k must be >= 2");
  if (V < 1) throw ConfigError("local_factor_lcm: V must be >= 1");
  const double r = f.r();
  const double u = 1.0 / static_cast<double>(p);
  const double t = std::pow(u, r + 1.0);
  if (!(t < 1.0))
    throw DomainError("local_factor_lcm: requires r > -1 (got r = " +
                      std::to_string(r) + ")");
  const auto binom = detail::binomials(k);
  double sum = 1.0;          // m = 0 term: f(1) * (sigma_0^k - 0) = 1
  double sigma_prev = 1.0;   // sigma_{m-1}
  double tm = 1.0;           // t^m
  double um = 1.0;           // u^m
  for (int m = 1; m <= V; ++m) {
    tm *= t;
    um *= u;
    double w = 0.0, sig_pow = 1.0;  // sigma_prev^(k-j) built backwards
    // accumulate j descending so sig_pow grows by one factor each step
    for (int j = k; j >= 1; --j) {
      w += binom[static_cast<size_t>(j)] * sig_pow * std::pow(tm, j - 1);
      sig_pow *= sigma_prev;
    }
    sum += f.scaled_pp(p, m) * w * um;
    sigma_prev += tm;
  }
  LocalFactorResult res;
  res.prime = p;
  res.value = std::pow(1.0 - u, k) * sum;
  res.exponent_cutoff = V;
  if (c3 <= 0.0) c3 = detail::local_c3(f, p, V + 4);
  res.tail_estimate = detail::exponent_tail_bound(c3, k, u, t, V);
  return res;
}

// Local factor of the (max-min) exponent kernel,
//
//   (1 - 1/p)^k * sum over tuples nu of f(p^(max nu - min nu)) * t^(sum nu),
//
// grouped by (a, b) = (min, max) through inclusion-exclusion on the cube
// counts T(a,b) = (sum_{nu=a..b} t^nu)^k. With d = b - a the weight of one
// (a, d) cell factors as t^(ka) * t^d * PsiHat(d), where
//
//   PsiHat(0) = 1,
//   PsiHat(d) = B(d) - t^(k-1) B(d-1),
//   B(0) = 1,  B(d) = sum_{j=1..k} C(k,j) Phi(d-1)^(k-j) t^(d(j-1)),
//   Phi(l) = sum_{i=0..l} t^i,
//
// so the whole factor is evaluated without subtracting nearly-equal cube
// powers. Truncation keeps max <= V, i.e. a <= V - d.
inline LocalFactorResult local_factor_ratio(const MultiplicativeFunction& f,
                                            int k, i64 p, int V,
                                            double c3 = 0.0) {
  if (k < 2) throw ConfigError("local_factor_ratio: k must be >= 2");
  if (V < 1) throw ConfigError("local_factor_ratio: V must be >= 1");
  const double r = f.r();
  if (r < 0.0)
    throw DomainError("local_factor_ratio: requires r >= 0 (got r = " +
                      std::to_string(r) + ")");
  const double u = 1.0 / static_cast<double>(p);
  const double t = std::pow(u, r + 1.0);
  const auto binom = detail::binomials(k);
  const double tk = std::pow(t, k);

  // SA[n] = sum_{a=0..n} t^(ka)
  std::vector<double> sa(static_cast<size_t>(V) + 1);
  {
    double pw = 1.0, acc = 0.0;
    for (int n = 0; n <= V; ++n) {
      acc += pw;
      pw *= tk;
      sa[static_cast<size_t>(n)] = acc;
    }
  }

  auto b_of = [&](int d, double phi_dm1) {
    if (d == 0) return 1.0;
    const double td = std::pow(t, d);
    double b = 0.0, phi_pow = 1.0;
    for (int j = k; j >= 1; --j) {
      b += binom[static_cast<size_t>(j)] * phi_pow * std::pow(td, j - 1);
      phi_pow *= phi_dm1;
    }
    return b;
  };

  double sum = sa[static_cast<size_t>(V)];  // d = 0 diagonal cells
  double phi = 1.0;                         // Phi(d-1), starts at Phi(0)
  double b_prev = 1.0;                      // B(d-1)
  double ud = 1.0;                          // u^d
  const double tk1 = std::pow(t, k - 1);
  for (int d = 1; d <= V; ++d) {
    ud *= u;
    const double b_cur = b_of(d, phi);
    const double psi_hat = b_cur - tk1 * b_prev;
    sum += f.scaled_pp(p, d) * ud * psi_hat * sa[static_cast<size_t>(V - d)];
    phi += std::pow(t, d);
    b_prev = b_cur;
  }

  LocalFactorResult res;
  res.prime = p;
  res.value = std::pow(1.0 - u, k) * sum;
  res.exponent_cutoff = V;
  if (c3 <= 0.0) c3 = detail::local_c3(f, p, V + 4);
  // For r >= 0 the omitted mass is bounded by the same geometric envelope
  // as the lcm kernel, since p^(r(max-min)) <= p^(r max).
  res.tail_estimate = detail::exponent_tail_bound(c3, k, u, t, V);
  return res;
}

}  // namespace lcmavg
