#pragma once

#include <cmath>
#include <span>
#include <string>

#include "lcmavg/errors.hpp"
#include "lcmavg/kahan.hpp"
#include "lcmavg/primes.hpp"

namespace lcmavg {

namespace detail {

// B_{2j} / (2j)! for j = 1..14.
inline constexpr double kBernoulliOverFactorial[] = {
    8.3333333333333333e-02,  -1.3888888888888889e-03, 3.3068783068783069e-05,
    -8.2671957671957672e-07, 2.0876756987868099e-08,  -5.2841901386874932e-10,
    1.3382536530684679e-11,  -3.3896802963225829e-13, 8.5860620562778446e-15,
    -2.1748686985580619e-16, 5.5090028283602295e-18,  -1.3954464685812523e-19,
    3.5347070396294675e-21,  -8.9535174270375469e-23,
};

}  // namespace detail

// Riemann zeta for real s > 1 by Euler-Maclaurin corrected partial sums:
//
//   zeta(s) = sum_{n<N} n^-s + N^(1-s)/(s-1) + N^-s/2
//           + sum_{j>=1} B_{2j}/(2j)! * s(s+1)...(s+2j-2) * N^(-s-2j+1)
//
// The correction series is truncated once the next term drops below tol;
// if it stalls within the 14 tabulated terms, N is doubled and the whole
// evaluation retried.
inline double zeta(double s, double tol = 1e-12) {
  if (!(s > 1.0)) throw DomainError("zeta: requires s > 1");
  if (s >= 64.0) {
    // Terms from n = 4 on are below 1e-38; three suffice at full precision.
    return 1.0 + std::pow(2.0, -s) + std::pow(3.0, -s);
  }
  double best = 0.0, best_err = HUGE_VAL;
  for (int N = 24; N <= 12288; N *= 2) {
    KahanSum partial;
    for (int n = 1; n < N; ++n)
      partial.add(std::pow(static_cast<double>(n), -s));
    const double Nd = static_cast<double>(N);
    double ans = partial.value() + std::pow(Nd, 1.0 - s) / (s - 1.0) +
                 0.5 * std::pow(Nd, -s);
    double rising = s;                        // s(s+1)...(s+2j-2)
    double npow = std::pow(Nd, -s - 1.0);     // N^(-s-2j+1)
    double last_term = HUGE_VAL;
    for (int j = 1; j <= 14; ++j) {
      const double term =
          detail::kBernoulliOverFactorial[j - 1] * rising * npow;
      ans += term;
      last_term = std::abs(term);
      if (last_term <= tol * 0.125) return ans;
      rising *= (s + 2.0 * j - 1.0) * (s + 2.0 * j);
      npow /= Nd * Nd;
    }
    if (last_term < best_err) {
      best = ans;
      best_err = last_term;
    }
  }
  throw ToleranceNotMet("zeta: Euler-Maclaurin tail did not reach tolerance",
                        best, best_err);
}

// Prime zeta P(s) = sum_p p^-s for s > 1, via
// P(s) = sum_{n>=1} mu(n)/n * log zeta(n s).
inline double prime_zeta(double s, double tol = 1e-14) {
  if (!(s > 1.0)) throw DomainError("prime_zeta: requires s > 1");
  KahanSum acc;
  for (int n = 1; n <= 128; ++n) {
    const double ns = n * s;
    int mu = mobius(static_cast<u64>(n));
    if (ns >= 64.0) {
      // log zeta(ns) ~ 2^-ns; at this point the series has converged.
      if (mu != 0) acc.add(std::pow(2.0, -ns) * mu / n);
      if (std::pow(2.0, -ns) < tol) break;
      continue;
    }
    if (mu == 0) continue;
    acc.add(std::log(zeta(ns, tol)) * mu / n);
  }
  return acc.value();
}

// sum over primes p > prime_cutoff of p^-s, given the primes up to the
// cutoff. Clamped at zero against rounding.
inline double prime_zeta_tail(double s, std::span<const i64> primes_below) {
  double total = prime_zeta(s);
  KahanSum head;
  for (i64 p : primes_below) head.add(std::pow(static_cast<double>(p), -s));
  return std::max(total - head.value(), 0.0);
}

}  // namespace lcmavg
