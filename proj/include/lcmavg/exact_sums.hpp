#pragma once

#include <gmpxx.h>

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "lcmavg/errors.hpp"
#include "lcmavg/euler_product.hpp"
#include "lcmavg/exact_accumulator.hpp"
#include "lcmavg/kahan.hpp"
#include "lcmavg/multiplicative.hpp"
#include "lcmavg/parallel.hpp"
#include "lcmavg/primes.hpp"
#include "lcmavg/zeta.hpp"

namespace lcmavg {

enum class SumKind { lcm, ratio, normalized_lcm, gcd };

inline const char* sum_kind_name(SumKind k) {
  switch (k) {
    case SumKind::lcm: return "lcm";
    case SumKind::ratio: return "ratio";
    case SumKind::normalized_lcm: return "normalized";
    case SumKind::gcd: return "gcd";
  }
  return "?";
}

// Feasibility caps on the range bound x per arity. Enumeration work is
// ~x^k/k!, so the defaults keep any single sum under a few seconds.
struct SumCaps {
  long max_x_k2 = 10'000;
  long max_x_k3 = 512;
  long max_x_k4 = 128;
  bool enforce = true;

  long cap_for(int k) const {
    if (k <= 2) return max_x_k2;
    if (k == 3) return max_x_k3;
    if (k == 4) return max_x_k4;
    return 64;
  }
  void check(int k, long x) const {
    if (!enforce) return;
    const long cap = cap_for(k);
    if (x > cap)
      throw ResourceCapError("sum: x = " + std::to_string(x) +
                             " exceeds the feasibility cap for k = " +
                             std::to_string(k) + " (max feasible x = " +
                             std::to_string(cap) +
                             "; override the cap to go further)");
  }
};

struct ExactSumResult {
  long x = 0;
  int k = 0;
  SumKind kind = SumKind::lcm;
  bool exact = false;
  mpz_class value_exact;  // meaningful when exact
  double value = 0.0;     // double view of the value, always set
  std::optional<double> main_term;
  std::optional<double> relative_error;
};

namespace detail {

// x^e by repeated multiplication; exact for results below 2^53.
inline double ipow(double x, int e) {
  double v = 1.0;
  for (int i = 0; i < e; ++i) v *= x;
  return v;
}

inline double power_xk(long x, int k, double r) {
  const double kr1 = static_cast<double>(k) * (r + 1.0);
  if (kr1 == std::floor(kr1))
    return ipow(static_cast<double>(x), static_cast<int>(kr1));
  return std::pow(static_cast<double>(x), kr1);
}

inline int factorial(int k) {
  int v = 1;
  for (int i = 2; i <= k; ++i) v *= i;
  return v;
}

// Multinomial weight k! / prod(multiplicities!) of a nondecreasing tuple.
inline long multiset_weight(std::span<const u64> tup) {
  long w = factorial(static_cast<int>(tup.size()));
  int run = 1;
  for (size_t i = 1; i < tup.size(); ++i) {
    if (tup[i] == tup[i - 1]) {
      ++run;
      w /= run;
    } else {
      run = 1;
    }
  }
  return w;
}

// Enumerates nondecreasing tuples with first coordinate fixed, carrying the
// incremental lcm and gcd of the prefix. leaf(tuple, lcm, gcd, weight).
template <typename Leaf>
void walk_multisets(long x, int k, int depth, std::array<u64, 8>& tup, u64 l,
                    u64 g, Leaf&& leaf) {
  if (depth == k) {
    leaf(std::span<const u64>(tup.data(), static_cast<size_t>(k)), l, g,
         multiset_weight(std::span<const u64>(tup.data(),
                                              static_cast<size_t>(k))));
    return;
  }
  for (u64 n = tup[static_cast<size_t>(depth - 1)];
       n <= static_cast<u64>(x); ++n) {
    tup[static_cast<size_t>(depth)] = n;
    walk_multisets(x, k, depth + 1, tup, lcm2_checked(l, n), std::gcd(g, n),
                   leaf);
  }
}

inline void accumulate_exact(ExactAccumulator& acc, const mpz_class& v,
                             long weight) {
  if (mpz_fits_slong_p(v.get_mpz_t())) {
    acc.add_i128(static_cast<__int128>(mpz_get_si(v.get_mpz_t())) * weight);
  } else {
    acc.add(mpz_class(v * weight));
  }
}

// Smallest-prime-factor table: factors any v <= limit in O(number of prime
// factors), primes ascending.
class SpfTable {
 public:
  explicit SpfTable(long limit) : limit_(limit) {
    spf_.resize(static_cast<size_t>(limit) + 1, 0);
    for (long i = 2; i <= limit; ++i) {
      if (spf_[static_cast<size_t>(i)] != 0) continue;
      for (long j = i; j <= limit; j += i) {
        if (spf_[static_cast<size_t>(j)] == 0)
          spf_[static_cast<size_t>(j)] = static_cast<i32>(i);
      }
    }
  }

  int factor(u64 v, std::array<std::pair<i32, i32>, 16>& out) const {
    int n = 0;
    while (v > 1) {
      const i32 p = spf_[static_cast<size_t>(v)];
      i32 e = 0;
      do {
        v /= static_cast<u64>(p);
        ++e;
      } while (v % static_cast<u64>(p) == 0);
      out[static_cast<size_t>(n++)] = {p, e};
    }
    return n;
  }

  long limit() const { return limit_; }

 private:
  long limit_;
  std::vector<i32> spf_;
};

// Merged per-prime exponent profile of a tuple: max, min-where-present, and
// how many entries contain the prime. The lcm exponent is emax; the
// lcm/gcd exponent is emax - emin when the prime divides every entry and
// emax otherwise.
struct MergedFactors {
  struct Row {
    i32 p, emax, emin, cnt;
  };
  std::array<Row, 96> rows;
  int n = 0;
};

inline void merge_tuple_factors(const SpfTable& spf,
                                std::span<const u64> tuple,
                                MergedFactors& out) {
  std::array<std::array<std::pair<i32, i32>, 16>, 8> lists;
  std::array<int, 8> len{}, pos{};
  const int k = static_cast<int>(tuple.size());
  for (int i = 0; i < k; ++i)
    len[static_cast<size_t>(i)] =
        spf.factor(tuple[static_cast<size_t>(i)], lists[static_cast<size_t>(i)]);
  out.n = 0;
  for (;;) {
    i32 next_p = 0;
    for (int i = 0; i < k; ++i) {
      if (pos[static_cast<size_t>(i)] >= len[static_cast<size_t>(i)]) continue;
      const i32 p =
          lists[static_cast<size_t>(i)][static_cast<size_t>(pos[static_cast<size_t>(i)])].first;
      if (next_p == 0 || p < next_p) next_p = p;
    }
    if (next_p == 0) break;
    MergedFactors::Row row{next_p, 0, 0, 0};
    for (int i = 0; i < k; ++i) {
      auto& pi = pos[static_cast<size_t>(i)];
      if (pi >= len[static_cast<size_t>(i)]) continue;
      const auto& [p, e] = lists[static_cast<size_t>(i)][static_cast<size_t>(pi)];
      if (p != next_p) continue;
      row.emax = std::max(row.emax, e);
      row.emin = row.cnt == 0 ? e : std::min(row.emin, e);
      ++row.cnt;
      ++pi;
    }
    out.rows[static_cast<size_t>(out.n++)] = row;
  }
}

// Per-worker cache of exact f values keyed by the argument (the tuple's
// lcm, or lcm/gcd). Values that fit in 128 bits stay in a flat fast map;
// the rare oversized ones go through an arbitrary-precision side map. On a
// miss the argument's factorization comes from the merged tuple profile,
// never from trial division. Both maps are bounded and wiped when full.
class ExactEvalCache {
 public:
  ExactEvalCache(const MultiplicativeFunction& f, const SpfTable* spf)
      : f_(&f), spf_(spf) {}

  void accumulate(ExactAccumulator& acc, u64 arg, long weight,
                  std::span<const u64> tuple, bool ratio_kind) {
    // Small arguments recur across many tuples and are worth caching; the
    // large ones are mostly unique, and recomputing beats map churn.
    const bool cacheable = arg < kCacheArgBound;
    if (cacheable) {
      if (auto it = small_.find(arg); it != small_.end()) {
        add_small(acc, it->second, weight);
        return;
      }
      if (auto it = big_.find(arg); it != big_.end()) {
        acc.add(mpz_class(it->second * weight));
        return;
      }
    }
    unsigned __int128 value;
    if (compute_u128(arg, tuple, ratio_kind, value)) {
      if (cacheable) {
        if (small_.size() >= kMaxEntries) small_.clear();
        small_.emplace(arg, value);
      }
      add_small(acc, value, weight);
    } else {
      const mpz_class value_big = f_->eval_exact(arg);
      if (cacheable) {
        if (big_.size() >= kMaxBigEntries) big_.clear();
        big_.emplace(arg, value_big);
      }
      acc.add(mpz_class(value_big * weight));
    }
  }

 private:
  static constexpr size_t kMaxEntries = 1u << 21;
  static constexpr size_t kMaxBigEntries = 1u << 16;
  static constexpr u64 kCacheArgBound = u64(1) << 24;

  static void add_small(ExactAccumulator& acc, unsigned __int128 v, long w) {
    // v < 2^120 by construction, w <= 8!: the product fits signed 128.
    acc.add_i128(static_cast<__int128>(v * static_cast<unsigned __int128>(w)));
  }

  bool compute_u128(u64 arg, std::span<const u64> tuple, bool ratio_kind,
                    unsigned __int128& out) {
    out = 1;
    if (arg == 1) return true;
    constexpr unsigned __int128 kFitBound = (unsigned __int128)1 << 120;
    if (spf_ != nullptr) {
      merge_tuple_factors(*spf_, tuple, scratch_);
      for (int i = 0; i < scratch_.n; ++i) {
        const auto& row = scratch_.rows[static_cast<size_t>(i)];
        const int e = ratio_kind
                          ? row.emax - (row.cnt == static_cast<int>(tuple.size())
                                            ? row.emin
                                            : 0)
                          : row.emax;
        if (e == 0) continue;
        unsigned __int128 pp;
        if (!f_->pp_u128(row.p, e, pp)) return false;
        if (__builtin_mul_overflow(out, pp, &out)) return false;
      }
      if (out >= kFitBound) return false;
      return true;
    }
    // no SPF table (range beyond its budget): classic factorization
    for (const auto& [p, e] : factorize(arg)) {
      unsigned __int128 pp;
      if (!f_->pp_u128(p, e, pp)) return false;
      if (__builtin_mul_overflow(out, pp, &out)) return false;
    }
    if (out >= kFitBound) return false;
    return true;
  }

  const MultiplicativeFunction* f_;
  const SpfTable* spf_;
  MergedFactors scratch_;
  std::unordered_map<u64, unsigned __int128> small_;
  std::unordered_map<u64, mpz_class> big_;
};

class RealEvalCache {
 public:
  RealEvalCache(const MultiplicativeFunction& f, const SpfTable* spf)
      : f_(&f), spf_(spf) {}

  double get(u64 arg, std::span<const u64> tuple, bool ratio_kind) {
    const bool cacheable = arg < kCacheArgBound;
    if (cacheable) {
      auto it = map_.find(arg);
      if (it != map_.end()) return it->second;
    }
    double value;
    if (spf_ != nullptr) {
      merge_tuple_factors(*spf_, tuple, scratch_);
      double ratio = 1.0;
      for (int i = 0; i < scratch_.n; ++i) {
        const auto& row = scratch_.rows[static_cast<size_t>(i)];
        const int e = ratio_kind
                          ? row.emax - (row.cnt == static_cast<int>(tuple.size())
                                            ? row.emin
                                            : 0)
                          : row.emax;
        if (e != 0) ratio *= f_->scaled_pp(row.p, e);
      }
      value = ratio * std::pow(static_cast<double>(arg), f_->r());
    } else {
      value = f_->eval(arg);
    }
    if (cacheable) {
      if (map_.size() >= kMaxEntries) map_.clear();
      map_.emplace(arg, value);
    }
    return value;
  }

 private:
  static constexpr size_t kMaxEntries = 1u << 21;
  static constexpr u64 kCacheArgBound = u64(1) << 24;
  const MultiplicativeFunction* f_;
  const SpfTable* spf_;
  MergedFactors scratch_;
  std::unordered_map<u64, double> map_;
};

}  // namespace detail

// Shared enumeration driver for the lcm / ratio / normalized kinds. The
// cube is reduced to nondecreasing tuples weighted by the multinomial
// count of their permutations; f([n...]) depends only on the multiset, so
// the reduction is exact. Chunked over the smallest coordinate; chunk
// results merge in chunk order, so values do not depend on the worker count.
inline ExactSumResult exact_sum(const MultiplicativeFunction& f, int k, long x,
                                SumKind kind,
                                std::optional<double> constant = std::nullopt,
                                const SumCaps& caps = {}, int workers = 1) {
  if (k < 2 || k > 8) throw ConfigError("exact_sum: k must be in [2, 8]");
  if (x < 1) throw ConfigError("exact_sum: x must be >= 1");
  if (kind == SumKind::gcd)
    throw ConfigError("exact_sum: use sum_gcd_via_identity / bruteforce");
  caps.check(k, x);
  const double r = f.r();

  const bool exact_lane =
      f.integer_valued() && (kind != SumKind::normalized_lcm || r == 0.0);

  std::vector<ExactAccumulator> int_parts;
  std::vector<KahanSum> real_parts;
  const int n_chunks = static_cast<int>(x);
  if (exact_lane) {
    int_parts.resize(static_cast<size_t>(n_chunks));
  } else {
    real_parts.resize(static_cast<size_t>(n_chunks));
  }

  // Factorizations of the tuple entries come from a shared SPF table; the
  // argument's factorization is then a k-way exponent merge, so cache
  // misses never pay for trial division of the (much larger) lcm.
  std::optional<detail::SpfTable> spf;
  if (x <= 2'000'000) spf.emplace(x);
  const detail::SpfTable* spf_ptr = spf ? &*spf : nullptr;

  const int max_workers = 64;
  std::vector<std::optional<detail::ExactEvalCache>> exact_caches(
      static_cast<size_t>(max_workers));
  std::vector<std::optional<detail::RealEvalCache>> real_caches(
      static_cast<size_t>(max_workers));
  workers = std::clamp(workers, 1, max_workers);
  const bool ratio_kind = kind == SumKind::ratio;

  run_chunks(n_chunks, workers, [&](int c, int worker) {
    std::array<u64, 8> tup{};
    const u64 n1 = static_cast<u64>(c) + 1;
    tup[0] = n1;
    if (exact_lane) {
      auto& cache = exact_caches[static_cast<size_t>(worker)];
      if (!cache) cache.emplace(f, spf_ptr);
      ExactAccumulator acc;
      detail::walk_multisets(
          x, k, 1, tup, n1, n1,
          [&](std::span<const u64> t, u64 l, u64 g, long w) {
            const u64 arg = ratio_kind ? l / g : l;
            cache->accumulate(acc, arg, w, t, ratio_kind);
          });
      int_parts[static_cast<size_t>(c)] = acc;
    } else {
      auto& cache = real_caches[static_cast<size_t>(worker)];
      if (!cache) cache.emplace(f, spf_ptr);
      KahanSum acc;
      detail::walk_multisets(
          x, k, 1, tup, n1, n1,
          [&](std::span<const u64> t, u64 l, u64 g, long w) {
            const u64 arg = ratio_kind ? l / g : l;
            double term =
                cache->get(arg, t, ratio_kind) * static_cast<double>(w);
            if (kind == SumKind::normalized_lcm && r != 0.0) {
              double prod = 1.0;
              for (u64 n : t) prod *= static_cast<double>(n);
              term /= std::pow(prod, r);
            }
            acc.add(term);
          });
      real_parts[static_cast<size_t>(c)] = acc;
    }
  });

  ExactSumResult res;
  res.x = x;
  res.k = k;
  res.kind = kind;
  if (exact_lane) {
    ExactAccumulator total;
    for (const auto& part : int_parts) total.merge(part);
    res.exact = true;
    res.value_exact = total.total();
    res.value = res.value_exact.get_d();
  } else {
    KahanSum total;
    for (const auto& part : real_parts) total.merge(part);
    res.value = total.value();
  }

  if (constant.has_value()) {
    const double c = *constant;
    double main;
    if (kind == SumKind::normalized_lcm) {
      main = c * detail::ipow(static_cast<double>(x), k);
    } else {
      main = c * detail::power_xk(x, k, r) /
             detail::ipow(r + 1.0, k);
    }
    res.main_term = main;
    res.relative_error = res.value / main - 1.0;
  }
  return res;
}

// sum over all k-tuples bounded by x of f(lcm of the tuple).
inline ExactSumResult sum_lcm(const MultiplicativeFunction& f, int k, long x,
                              std::optional<double> constant = std::nullopt,
                              const SumCaps& caps = {}, int workers = 1) {
  return exact_sum(f, k, x, SumKind::lcm, constant, caps, workers);
}

// sum of f(lcm/gcd) over all k-tuples bounded by x.
inline ExactSumResult sum_ratio(const MultiplicativeFunction& f, int k, long x,
                                std::optional<double> constant = std::nullopt,
                                const SumCaps& caps = {}, int workers = 1) {
  return exact_sum(f, k, x, SumKind::ratio, constant, caps, workers);
}

// sum of f(lcm) / (n_1...n_k)^r over all k-tuples bounded by x.
inline ExactSumResult sum_normalized(const MultiplicativeFunction& f, int k,
                                     long x,
                                     std::optional<double> constant = std::nullopt,
                                     const SumCaps& caps = {},
                                     int workers = 1) {
  return exact_sum(f, k, x, SumKind::normalized_lcm, constant, caps, workers);
}

// sum over the cube of f(gcd of the tuple), evaluated through
//   sum_{d<=x} (mu*f)(d) * floor(x/d)^k,
// with (mu*f)(d) by direct divisor enumeration. Exact for integer-valued f.
// The main term zeta(k-1)/zeta(k) * x^k applies to f = id, k >= 3.
inline ExactSumResult sum_gcd_via_identity(const MultiplicativeFunction& f,
                                           int k, long x,
                                           const SumCaps& caps = {}) {
  if (k < 2 || k > 8) throw ConfigError("sum_gcd: k must be in [2, 8]");
  if (x < 1) throw ConfigError("sum_gcd: x must be >= 1");
  caps.check(k, x);
  ExactSumResult res;
  res.x = x;
  res.k = k;
  res.kind = SumKind::gcd;
  if (f.integer_valued()) {
    ExactAccumulator acc;
    for (long d = 1; d <= x; ++d) {
      mpz_class conv = 0;  // (mu*f)(d)
      for (u64 e : divisors(static_cast<u64>(d))) {
        const int mu = mobius(e);
        if (mu == 0) continue;
        mpz_class fe = f.eval_exact(static_cast<u64>(d) / e);
        conv += mu > 0 ? fe : -fe;
      }
      mpz_class block;
      mpz_ui_pow_ui(block.get_mpz_t(), static_cast<unsigned long>(x / d),
                    static_cast<unsigned long>(k));
      acc.add(mpz_class(conv * block));
    }
    res.exact = true;
    res.value_exact = acc.total();
    res.value = res.value_exact.get_d();
  } else {
    KahanSum acc;
    for (long d = 1; d <= x; ++d) {
      double conv = 0.0;
      for (u64 e : divisors(static_cast<u64>(d))) {
        const int mu = mobius(e);
        if (mu == 0) continue;
        conv += mu * f.eval(static_cast<u64>(d) / e);
      }
      acc.add(conv * detail::ipow(static_cast<double>(x / d), k));
    }
    res.value = acc.value();
  }
  if (f.kind() == MultiplicativeFunction::Kind::id_r && f.r() == 1.0 &&
      k >= 3) {
    const double main =
        zeta(k - 1.0) / zeta(static_cast<double>(k)) *
        detail::ipow(static_cast<double>(x), k);
    res.main_term = main;
    res.relative_error = res.value / main - 1.0;
  } else if (f.constant_one()) {
    // mu*1 is the unit of Dirichlet convolution: the sum is exactly x^k.
    const double main = detail::ipow(static_cast<double>(x), k);
    res.main_term = main;
    res.relative_error = res.value / main - 1.0;
  }
  return res;
}

// Direct enumeration oracle for the gcd sum: the full cube, one gcd per
// tuple, no reductions. Kept deliberately independent of the identity path.
inline ExactSumResult sum_gcd_bruteforce(const MultiplicativeFunction& f,
                                         int k, long x,
                                         const SumCaps& caps = {},
                                         int workers = 1) {
  if (k < 2 || k > 8) throw ConfigError("sum_gcd: k must be in [2, 8]");
  if (x < 1) throw ConfigError("sum_gcd: x must be >= 1");
  caps.check(k, x);
  const bool exact_lane = f.integer_valued();

  // f on [1..x]; gcds never leave that range.
  std::vector<mpz_class> ftab_exact;
  std::vector<double> ftab_real;
  if (exact_lane) {
    ftab_exact.resize(static_cast<size_t>(x) + 1);
    for (long n = 1; n <= x; ++n)
      ftab_exact[static_cast<size_t>(n)] = f.eval_exact(static_cast<u64>(n));
  } else {
    ftab_real.resize(static_cast<size_t>(x) + 1);
    for (long n = 1; n <= x; ++n)
      ftab_real[static_cast<size_t>(n)] = f.eval(static_cast<u64>(n));
  }

  const int n_chunks = static_cast<int>(x);
  std::vector<ExactAccumulator> int_parts;
  std::vector<KahanSum> real_parts;
  if (exact_lane) {
    int_parts.resize(static_cast<size_t>(n_chunks));
  } else {
    real_parts.resize(static_cast<size_t>(n_chunks));
  }

  run_chunks(n_chunks, workers, [&](int c, int) {
    const u64 n1 = static_cast<u64>(c) + 1;
    std::array<u64, 8> tup{};
    tup[0] = n1;
    ExactAccumulator iacc;
    KahanSum racc;
    // full cube over the remaining k-1 coordinates
    auto rec = [&](auto&& self, int depth, u64 g) -> void {
      if (depth == k) {
        if (exact_lane) {
          detail::accumulate_exact(iacc, ftab_exact[static_cast<size_t>(g)],
                                   1);
        } else {
          racc.add(ftab_real[static_cast<size_t>(g)]);
        }
        return;
      }
      for (u64 n = 1; n <= static_cast<u64>(x); ++n)
        self(self, depth + 1, std::gcd(g, n));
    };
    rec(rec, 1, n1);
    if (exact_lane) {
      int_parts[static_cast<size_t>(c)] = iacc;
    } else {
      real_parts[static_cast<size_t>(c)] = racc;
    }
  });

  ExactSumResult res;
  res.x = x;
  res.k = k;
  res.kind = SumKind::gcd;
  if (exact_lane) {
    ExactAccumulator total;
    for (const auto& part : int_parts) total.merge(part);
    res.exact = true;
    res.value_exact = total.total();
    res.value = res.value_exact.get_d();
  } else {
    KahanSum total;
    for (const auto& part : real_parts) total.merge(part);
    res.value = total.value();
  }
  return res;
}

// One row per x of value against the predicted main term, plus the
// least-squares slope of log|relative error| against log x.
struct ConvergenceRow {
  long x = 0;
  double value = 0.0;
  double main_term = 0.0;
  double relative_error = 0.0;
};

struct ConvergenceTable {
  std::string function;
  double r = 0.0;
  int k = 0;
  SumKind kind = SumKind::lcm;
  double constant = 0.0;
  std::vector<ConvergenceRow> rows;
  std::optional<double> fitted_slope;
};

inline ConvergenceTable convergence_study(const MultiplicativeFunction& f,
                                          int k, SumKind kind,
                                          std::span<const long> x_values,
                                          const SumCaps& caps = {},
                                          int workers = 1,
                                          double constant_tol = 1e-10) {
  if (x_values.empty())
    throw ConfigError("convergence_study: x list must be nonempty");
  for (size_t i = 1; i < x_values.size(); ++i) {
    if (x_values[i] <= x_values[i - 1])
      throw ConfigError("convergence_study: x list must be ascending");
  }

  ConvergenceTable table;
  table.function = f.name();
  table.r = f.r();
  table.k = k;
  table.kind = kind;

  double constant;
  if (kind == SumKind::gcd) {
    if (!(f.kind() == MultiplicativeFunction::Kind::id_r && f.r() == 1.0 &&
          k >= 3))
      throw ConfigError(
          "convergence_study: gcd kind has a main term only for id (r=1), "
          "k >= 3");
    constant = zeta(k - 1.0) / zeta(static_cast<double>(k));
  } else if (f.constant_one()) {
    constant = 1.0;
  } else {
    const Kernel kernel = (kind == SumKind::ratio)
                              ? Kernel::ratio_max_minus_min
                              : Kernel::lcm_max;
    constant = euler_product(f, k, kernel, constant_tol, {}, workers).value;
  }
  table.constant = constant;

  for (long x : x_values) {
    ExactSumResult s =
        (kind == SumKind::gcd)
            ? sum_gcd_via_identity(f, k, x, caps)
            : exact_sum(f, k, x, kind, constant, caps, workers);
    ConvergenceRow row;
    row.x = x;
    row.value = s.value;
    row.main_term = *s.main_term;
    row.relative_error = *s.relative_error;
    table.rows.push_back(row);
  }

  std::vector<double> lx, ly;
  for (const ConvergenceRow& row : table.rows) {
    if (row.relative_error != 0.0 && std::isfinite(row.relative_error)) {
      lx.push_back(std::log(static_cast<double>(row.x)));
      ly.push_back(std::log(std::abs(row.relative_error)));
    }
  }
  const detail::LineFit fit = detail::fit_line(lx, ly);
  if (fit.ok) table.fitted_slope = fit.slope;
  return table;
}

// Exhaustive check of [m,n,q](m,n)(m,q)(n,q) = mnq(m,n,q) over the cube.
struct TripleIdentityReport {
  long limit = 0;
  bool holds = false;
  u64 triples_checked = 0;
  std::optional<std::array<long, 3>> counterexample;
};

inline TripleIdentityReport check_fernandez_identity(long limit) {
  if (limit < 1)
    throw ConfigError("triple identity check: limit must be >= 1");
  TripleIdentityReport rep;
  rep.limit = limit;
  rep.holds = true;
  for (long m = 1; m <= limit; ++m) {
    for (long n = 1; n <= limit; ++n) {
      const u64 gmn = std::gcd<u64>(m, n);
      const u64 lmn = static_cast<u64>(m) / gmn * static_cast<u64>(n);
      for (long q = 1; q <= limit; ++q) {
        const u64 gq = std::gcd<u64>(lmn, q);
        const u64 lcm3 = lmn / gq * static_cast<u64>(q);
        const u64 gmq = std::gcd<u64>(m, q);
        const u64 gnq = std::gcd<u64>(n, q);
        const u64 g3 = std::gcd(gmn, static_cast<u64>(q));
        const unsigned __int128 lhs = static_cast<unsigned __int128>(lcm3) *
                                      gmn * gmq * gnq;
        const unsigned __int128 rhs = static_cast<unsigned __int128>(m) * n *
                                      q * g3;
        ++rep.triples_checked;
        if (lhs != rhs) {
          rep.holds = false;
          if (!rep.counterexample) rep.counterexample = {{m, n, q}};
        }
      }
    }
  }
  return rep;
}

}  // namespace lcmavg
