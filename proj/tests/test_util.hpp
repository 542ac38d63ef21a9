// Test-only oracles: naive enumerations kept independent of the engine paths
// they check.
#pragma once

#include <gmpxx.h>

#include <numeric>
#include <vector>

#include "lcmavg/multiplicative.hpp"
#include "lcmavg/primes.hpp"

namespace lcmavg::test {

// All divisors of n by trial division, no library sharing.
inline std::vector<u64> naive_divisors(u64 n) {
  std::vector<u64> out;
  for (u64 d = 1; d * d <= n; ++d) {
    if (n % d == 0) {
      out.push_back(d);
      if (d != n / d) out.push_back(n / d);
    }
  }
  return out;
}

inline int naive_mobius(u64 n) {
  int sign = 1;
  for (u64 p = 2; p * p <= n; ++p) {
    if (n % p) continue;
    n /= p;
    if (n % p == 0) return 0;
    sign = -sign;
  }
  if (n > 1) sign = -sign;
  return sign;
}

// Full k-dimensional cube sum of f(lcm), f(lcm/gcd), or f(lcm)/(prod)^r,
// one tuple at a time, no multiset reduction, no shared enumeration code.
enum class NaiveKind { lcm, ratio, normalized };

inline mpz_class naive_cube_sum_exact(const MultiplicativeFunction& f, int k,
                                      long x, NaiveKind kind) {
  mpz_class total = 0;
  std::vector<long> tup(static_cast<size_t>(k), 1);
  for (;;) {
    u64 l = 1, g = 0;
    for (long v : tup) {
      const u64 uv = static_cast<u64>(v);
      l = l / std::gcd(l, uv) * uv;
      g = std::gcd(g, uv);
    }
    total += f.eval_exact(kind == NaiveKind::ratio ? l / g : l);
    int i = k - 1;
    while (i >= 0 && tup[static_cast<size_t>(i)] == x) --i;
    if (i < 0) break;
    ++tup[static_cast<size_t>(i)];
    for (int j = i + 1; j < k; ++j) tup[static_cast<size_t>(j)] = 1;
  }
  return total;
}

inline double naive_cube_sum_real(const MultiplicativeFunction& f, int k,
                                  long x, NaiveKind kind) {
  double total = 0.0;
  std::vector<long> tup(static_cast<size_t>(k), 1);
  for (;;) {
    u64 l = 1, g = 0;
    double prod = 1.0;
    for (long v : tup) {
      const u64 uv = static_cast<u64>(v);
      l = l / std::gcd(l, uv) * uv;
      g = std::gcd(g, uv);
      prod *= static_cast<double>(v);
    }
    double term = f.eval(kind == NaiveKind::ratio ? l / g : l);
    if (kind == NaiveKind::normalized) term /= std::pow(prod, f.r());
    total += term;
    int i = k - 1;
    while (i >= 0 && tup[static_cast<size_t>(i)] == x) --i;
    if (i < 0) break;
    ++tup[static_cast<size_t>(i)];
    for (int j = i + 1; j < k; ++j) tup[static_cast<size_t>(j)] = 1;
  }
  return total;
}

}  // namespace lcmavg::test
