#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "lcmavg/errors.hpp"

namespace lcmavg {

using i32 = std::int32_t;
using i64 = std::int64_t;
using u64 = std::uint64_t;

// Primes <= limit, ascending. Plain Eratosthenes on a byte array; fast
// enough for the 1e7 range this project uses. limit < 2 gives an empty list.
inline std::vector<i64> sieve_primes(i64 limit) {
  std::vector<i64> primes;
  if (limit < 2) return primes;
  std::vector<std::uint8_t> composite(static_cast<size_t>(limit) + 1, 0);
  for (i64 p = 2; p * p <= limit; ++p) {
    if (composite[static_cast<size_t>(p)]) continue;
    for (i64 q = p * p; q <= limit; q += p) composite[static_cast<size_t>(q)] = 1;
  }
  primes.reserve(limit > 16 ? static_cast<size_t>(limit / 3) : 8);
  for (i64 p = 2; p <= limit; ++p) {
    if (!composite[static_cast<size_t>(p)]) primes.push_back(p);
  }
  return primes;
}

// (prime, exponent) pairs of n, primes ascending; empty for n = 1.
inline std::vector<std::pair<i64, int>> factorize(u64 n) {
  if (n == 0) throw DomainError("factorize: n must be positive");
  std::vector<std::pair<i64, int>> factors;
  for (u64 p = 2; p * p <= n; p += (p == 2 ? 1 : 2)) {
    if (n % p != 0) continue;
    int e = 0;
    while (n % p == 0) {
      n /= p;
      ++e;
    }
    factors.emplace_back(static_cast<i64>(p), e);
  }
  if (n > 1) factors.emplace_back(static_cast<i64>(n), 1);
  return factors;
}

// Moebius function via trial-division factorization.
inline int mobius(u64 n) {
  if (n == 0) throw DomainError("mobius: n must be positive");
  int sign = 1;
  for (u64 p = 2; p * p <= n; p += (p == 2 ? 1 : 2)) {
    if (n % p != 0) continue;
    n /= p;
    if (n % p == 0) return 0;
    sign = -sign;
  }
  if (n > 1) sign = -sign;
  return sign;
}

// All divisors of n, ascending.
inline std::vector<u64> divisors(u64 n) {
  if (n == 0) throw DomainError("divisors: n must be positive");
  std::vector<u64> divs{1};
  for (const auto& [p, e] : factorize(n)) {
    size_t base = divs.size();
    u64 pk = 1;
    for (int j = 1; j <= e; ++j) {
      pk *= static_cast<u64>(p);
      for (size_t i = 0; i < base; ++i) divs.push_back(divs[i] * pk);
    }
  }
  std::sort(divs.begin(), divs.end());
  return divs;
}

inline u64 checked_mul_u64(u64 a, u64 b, const char* what) {
  u64 out;
  if (__builtin_mul_overflow(a, b, &out)) throw OverflowError(what);
  return out;
}

// lcm of two values with 64-bit overflow detection.
inline u64 lcm2_checked(u64 a, u64 b) {
  if (a == 0 || b == 0) throw DomainError("lcm: arguments must be positive");
  u64 g = std::gcd(a, b);
  return checked_mul_u64(a / g, b, "lcm exceeds the 64-bit accumulator");
}

inline u64 gcd_tuple(std::span<const u64> ns) {
  if (ns.empty()) throw DomainError("gcd_tuple: empty tuple");
  u64 g = 0;
  for (u64 n : ns) {
    if (n == 0) throw DomainError("gcd_tuple: entries must be positive");
    g = std::gcd(g, n);
  }
  return g;
}

// Incremental pairwise lcm; overflow is detected, never wrapped.
inline u64 lcm_tuple(std::span<const u64> ns) {
  if (ns.empty()) throw DomainError("lcm_tuple: empty tuple");
  u64 l = 1;
  for (u64 n : ns) l = lcm2_checked(l, n);
  return l;
}

}  // namespace lcmavg
