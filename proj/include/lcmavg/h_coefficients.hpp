#pragma once

#include <gmpxx.h>

#include <array>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "lcmavg/errors.hpp"
#include "lcmavg/kahan.hpp"
#include "lcmavg/multiplicative.hpp"
#include "lcmavg/parallel.hpp"
#include "lcmavg/primes.hpp"

namespace lcmavg {

// Coefficients h(d_1..d_k) of the k-fold Moebius inversion
//
//   h(d_1,...,d_k) = sum over e_i | d_i of
//       mu(e_1)...mu(e_k) * (e_1...e_k)^r * f([d_1/e_1,...,d_k/e_k]),
//
// tabulated on the box 1 <= d_i <= B. T is mpz_class for the exact lane
// (integer-valued f with integral r) or double.
template <typename T>
struct HCoefficientTable {
  std::string function;
  double r = 0.0;
  int k = 2;
  long box = 0;
  std::vector<T> values;

  size_t index(std::span<const long> d) const {
    size_t idx = 0, stride = 1;
    for (int i = 0; i < k; ++i) {
      idx += static_cast<size_t>(d[static_cast<size_t>(i)] - 1) * stride;
      stride *= static_cast<size_t>(box);
    }
    return idx;
  }
  const T& at(std::span<const long> d) const { return values[index(d)]; }
};

namespace detail {

// Squarefree divisors of each d <= B, with their Moebius signs.
inline std::vector<std::vector<std::pair<long, int>>>
squarefree_divisor_table(long B) {
  std::vector<std::vector<std::pair<long, int>>> tab(
      static_cast<size_t>(B) + 1);
  for (long d = 1; d <= B; ++d) {
    for (u64 e : divisors(static_cast<u64>(d))) {
      const int mu = mobius(e);
      if (mu != 0) tab[static_cast<size_t>(d)].emplace_back(static_cast<long>(e), mu);
    }
  }
  return tab;
}

inline void check_h_box(int k, long B) {
  if (k < 2 || k > 4) throw ConfigError("h table: k must be in [2, 4]");
  if (B < 1) throw ConfigError("h table: box must be >= 1");
  double cells = 1;
  for (int i = 0; i < k; ++i) cells *= static_cast<double>(B);
  if (cells > double(1 << 22))
    throw ResourceCapError("h table: box " + std::to_string(B) + "^" +
                           std::to_string(k) + " exceeds the cell budget");
}

}  // namespace detail

template <typename T>
HCoefficientTable<T> h_table_impl(const MultiplicativeFunction& f, int k,
                                  long B, int workers) {
  detail::check_h_box(k, B);
  constexpr bool exact = std::is_same_v<T, mpz_class>;
  if constexpr (exact) {
    if (!f.integer_valued())
      throw ConfigError("h table (exact): function is not integer valued");
  }

  HCoefficientTable<T> table;
  table.function = f.name();
  table.r = f.r();
  table.k = k;
  table.box = B;
  size_t cells = 1;
  for (int i = 0; i < k; ++i) cells *= static_cast<size_t>(B);
  table.values.resize(cells);

  const auto sqfree = detail::squarefree_divisor_table(B);
  const unsigned long ir = static_cast<unsigned long>(std::max(f.r(), 0.0));
  const double rr = f.r();

  constexpr size_t kChunk = 1024;
  const int n_chunks = static_cast<int>((cells + kChunk - 1) / kChunk);
  const int max_workers = 64;
  std::vector<std::unordered_map<u64, T>> caches(
      static_cast<size_t>(max_workers));
  workers = std::clamp(workers, 1, max_workers);

  run_chunks(n_chunks, workers, [&](int c, int worker) {
    auto& fcache = caches[static_cast<size_t>(worker)];
    std::array<long, 4> d{}, m{};
    const size_t begin = static_cast<size_t>(c) * kChunk;
    const size_t end = std::min(begin + kChunk, cells);
    for (size_t idx = begin; idx < end; ++idx) {
      size_t rest = idx;
      for (int i = 0; i < k; ++i) {
        d[static_cast<size_t>(i)] = static_cast<long>(rest % static_cast<size_t>(B)) + 1;
        rest /= static_cast<size_t>(B);
      }
      T acc{};
      // nested loop over squarefree divisor choices
      auto rec = [&](auto&& self, int depth, long eprod, int sign) -> void {
        if (depth == k) {
          std::array<u64, 4> args{};
          for (int i = 0; i < k; ++i)
            args[static_cast<size_t>(i)] = static_cast<u64>(
                m[static_cast<size_t>(i)]);
          const u64 l = lcm_tuple(std::span<const u64>(args.data(),
                                                       static_cast<size_t>(k)));
          auto it = fcache.find(l);
          if (it == fcache.end()) {
            if constexpr (exact) {
              it = fcache.emplace(l, f.eval_exact(l)).first;
            } else {
              it = fcache.emplace(l, f.eval(l)).first;
            }
          }
          if constexpr (exact) {
            mpz_class ep;
            mpz_ui_pow_ui(ep.get_mpz_t(), static_cast<unsigned long>(eprod),
                          ir);
            acc += sign > 0 ? mpz_class(ep * it->second)
                            : mpz_class(-(ep * it->second));
          } else {
            acc += sign * std::pow(static_cast<double>(eprod), rr) *
                   it->second;
          }
          return;
        }
        for (const auto& [e, mu] : sqfree[static_cast<size_t>(
                 d[static_cast<size_t>(depth)])]) {
          m[static_cast<size_t>(depth)] = d[static_cast<size_t>(depth)] / e;
          self(self, depth + 1, eprod * e, sign * mu);
        }
      };
      rec(rec, 0, 1, 1);
      table.values[idx] = acc;
    }
  });
  return table;
}

inline HCoefficientTable<mpz_class> h_table_exact(
    const MultiplicativeFunction& f, int k, long B, int workers = 1) {
  return h_table_impl<mpz_class>(f, k, B, workers);
}

inline HCoefficientTable<double> h_table_real(const MultiplicativeFunction& f,
                                              int k, long B, int workers = 1) {
  return h_table_impl<double>(f, k, B, workers);
}

// Checks that summing (j_1...j_k)^r h(d_1,...,d_k) over all divisor
// splittings j_i d_i = n_i reconstructs f([n_1,...,n_k]) on the whole box
// n_i <= x. Bit-exact for the integer lane.
struct ReconstructionReport {
  bool ok = false;
  u64 tuples_checked = 0;
  std::optional<std::array<long, 4>> first_mismatch;
};

inline ReconstructionReport check_reconstruction(
    const MultiplicativeFunction& f, int k, long x, int workers = 1) {
  if (k < 2 || k > 4)
    throw ConfigError("check_reconstruction: k must be in [2, 4]");
  if (x < 1) throw ConfigError("check_reconstruction: x must be >= 1");
  ReconstructionReport rep;
  rep.ok = true;

  const bool exact = f.integer_valued();
  HCoefficientTable<mpz_class> ht_exact;
  HCoefficientTable<double> ht_real;
  if (exact) {
    ht_exact = h_table_exact(f, k, x, workers);
  } else {
    ht_real = h_table_real(f, k, x, workers);
  }
  const unsigned long ir = static_cast<unsigned long>(std::max(f.r(), 0.0));

  // divisor lists up to x
  std::vector<std::vector<long>> divs(static_cast<size_t>(x) + 1);
  for (long n = 1; n <= x; ++n)
    for (u64 e : divisors(static_cast<u64>(n)))
      divs[static_cast<size_t>(n)].push_back(static_cast<long>(e));

  std::array<long, 4> n{}, d{};
  size_t cells = 1;
  for (int i = 0; i < k; ++i) cells *= static_cast<size_t>(x);
  for (size_t idx = 0; idx < cells && rep.ok; ++idx) {
    size_t rest = idx;
    for (int i = 0; i < k; ++i) {
      n[static_cast<size_t>(i)] =
          static_cast<long>(rest % static_cast<size_t>(x)) + 1;
      rest /= static_cast<size_t>(x);
    }
    std::array<u64, 4> args{};
    for (int i = 0; i < k; ++i)
      args[static_cast<size_t>(i)] = static_cast<u64>(n[static_cast<size_t>(i)]);
    const u64 l =
        lcm_tuple(std::span<const u64>(args.data(), static_cast<size_t>(k)));

    mpz_class acc_exact = 0;
    double acc_real = 0.0;
    auto rec = [&](auto&& self, int depth, long jprod) -> void {
      if (depth == k) {
        if (exact) {
          mpz_class jp;
          mpz_ui_pow_ui(jp.get_mpz_t(), static_cast<unsigned long>(jprod), ir);
          acc_exact +=
              jp * ht_exact.at(std::span<const long>(d.data(),
                                                     static_cast<size_t>(k)));
        } else {
          acc_real += std::pow(static_cast<double>(jprod), f.r()) *
                      ht_real.at(std::span<const long>(
                          d.data(), static_cast<size_t>(k)));
        }
        return;
      }
      for (long dv : divs[static_cast<size_t>(n[static_cast<size_t>(depth)])]) {
        d[static_cast<size_t>(depth)] = dv;
        self(self, depth + 1, jprod * (n[static_cast<size_t>(depth)] / dv));
      }
    };
    rec(rec, 0, 1);

    ++rep.tuples_checked;
    bool match;
    if (exact) {
      match = acc_exact == f.eval_exact(l);
    } else {
      const double want = f.eval(l);
      match = std::abs(acc_real - want) <=
              1e-9 * std::max(1.0, std::abs(want));
    }
    if (!match) {
      rep.ok = false;
      rep.first_mismatch = n;
    }
  }
  return rep;
}

// Compares h at prime-power tuples (p^a_1,...,p^a_k) computed by the global
// inversion formula against coefficient extraction from the local factor
// series: multiply sum f(p^max(nu)) u_1^nu_1...u_k^nu_k by
// prod_i (1 - p^r u_i) as a truncated formal power series.
struct LocalMatchReport {
  bool ok = false;
  int entries_checked = 0;
  std::optional<std::array<int, 4>> first_mismatch;
};

inline LocalMatchReport h_local_match(const MultiplicativeFunction& f, int k,
                                      i64 p, int a_max) {
  if (k < 2 || k > 4) throw ConfigError("h_local_match: k must be in [2, 4]");
  if (a_max < 1) throw ConfigError("h_local_match: a_max must be >= 1");
  LocalMatchReport rep;
  rep.ok = true;
  const bool exact = f.integer_valued();
  const unsigned long ir = static_cast<unsigned long>(std::max(f.r(), 0.0));
  const int n_side = a_max + 1;
  size_t cells = 1;
  for (int i = 0; i < k; ++i) cells *= static_cast<size_t>(n_side);

  // local series coefficients: L[nu] = f(p^max(nu))
  std::vector<mpz_class> series_exact;
  std::vector<double> series_real;
  if (exact) {
    series_exact.resize(cells);
  } else {
    series_real.resize(cells);
  }
  std::array<int, 4> a{};
  for (size_t idx = 0; idx < cells; ++idx) {
    size_t rest = idx;
    int mx = 0;
    for (int i = 0; i < k; ++i) {
      a[static_cast<size_t>(i)] = static_cast<int>(rest % static_cast<size_t>(n_side));
      mx = std::max(mx, a[static_cast<size_t>(i)]);
      rest /= static_cast<size_t>(n_side);
    }
    if (exact) {
      series_exact[idx] = mx == 0 ? 1 : f.pp_exact(p, mx);
    } else {
      series_real[idx] = mx == 0 ? 1.0 : f.pp(p, mx);
    }
  }
  // multiply by (1 - p^r u_i) one coordinate at a time
  mpz_class pr_exact;
  if (exact)
    mpz_ui_pow_ui(pr_exact.get_mpz_t(), static_cast<unsigned long>(p), ir);
  const double pr_real = std::pow(static_cast<double>(p), f.r());
  size_t stride = 1;
  for (int i = 0; i < k; ++i) {
    for (size_t idx = cells; idx-- > 0;) {
      const int ai = static_cast<int>((idx / stride) % static_cast<size_t>(n_side));
      if (ai == 0) continue;
      if (exact) {
        series_exact[idx] -= pr_exact * series_exact[idx - stride];
      } else {
        series_real[idx] -= pr_real * series_real[idx - stride];
      }
    }
    stride *= static_cast<size_t>(n_side);
  }

  // global inversion at the same prime-power tuples: e_i in {1, p}
  for (size_t idx = 0; idx < cells; ++idx) {
    size_t rest = idx;
    for (int i = 0; i < k; ++i) {
      a[static_cast<size_t>(i)] = static_cast<int>(rest % static_cast<size_t>(n_side));
      rest /= static_cast<size_t>(n_side);
    }
    mpz_class g_exact = 0;
    double g_real = 0.0;
    for (unsigned mask = 0; mask < (1u << k); ++mask) {
      int mx = 0, bits = 0;
      bool valid = true;
      for (int i = 0; i < k && valid; ++i) {
        int ai = a[static_cast<size_t>(i)];
        if (mask & (1u << i)) {
          if (ai == 0) {
            valid = false;
            break;
          }
          --ai;
          ++bits;
        }
        mx = std::max(mx, ai);
      }
      if (!valid) continue;
      const int sign = (bits % 2 == 0) ? 1 : -1;
      if (exact) {
        mpz_class term;
        mpz_ui_pow_ui(term.get_mpz_t(), static_cast<unsigned long>(p),
                      ir * static_cast<unsigned long>(bits));
        term *= mx == 0 ? mpz_class(1) : f.pp_exact(p, mx);
        g_exact += sign > 0 ? term : mpz_class(-term);
      } else {
        g_real += sign * std::pow(pr_real, bits) *
                  (mx == 0 ? 1.0 : f.pp(p, mx));
      }
    }
    ++rep.entries_checked;
    bool match;
    if (exact) {
      match = g_exact == series_exact[idx];
    } else {
      match = std::abs(g_real - series_real[idx]) <=
              1e-9 * std::max(1.0, std::abs(g_real));
    }
    if (!match && rep.ok) {
      rep.ok = false;
      rep.first_mismatch = a;
    }
  }
  return rep;
}

// Partial sums P(B') = sum_{d_i <= B'} |h(d)| / (d_1...d_k)^(A+eps) at
// B' in {B/4, B/2, B}, where A is the absolute-convergence abscissa
// A = r + 1/2 for r >= 0 and (r+1)/2 for -1 < r < 0. Successive increments
// shrinking is the observable convergence signal; for r < 0 the report is
// observational only.
struct HDecayReport {
  double A = 0.0;
  double epsilon = 0.0;
  std::array<long, 3> box_points{};
  std::array<double, 3> partial_sums{};
  std::array<double, 2> increments{};
  bool increments_shrink = false;
  bool pass_applicable = false;  // true for r >= 0
};

inline HDecayReport h_decay_report(const MultiplicativeFunction& f, int k,
                                   long B, double epsilon, int workers = 1) {
  if (B < 4) throw ConfigError("h_decay_report: box must be >= 4");
  if (!(epsilon > 0)) throw ConfigError("h_decay_report: epsilon must be > 0");
  const double r = f.r();
  if (!(r > -1.0)) throw DomainError("h_decay_report: requires r > -1");
  HDecayReport rep;
  rep.A = r >= 0.0 ? r + 0.5 : (r + 1.0) / 2.0;
  rep.epsilon = epsilon;
  rep.pass_applicable = r >= 0.0;
  rep.box_points = {B / 4, B / 2, B};

  std::vector<double> habs;  // |h| on the full box
  {
    if (f.integer_valued()) {
      const auto t = h_table_exact(f, k, B, workers);
      habs.reserve(t.values.size());
      for (const mpz_class& v : t.values)
        habs.push_back(std::abs(v.get_d()));
    } else {
      const auto t = h_table_real(f, k, B, workers);
      habs.reserve(t.values.size());
      for (double v : t.values) habs.push_back(std::abs(v));
    }
  }

  const double expo = rep.A + epsilon;
  std::array<long, 4> d{};
  for (int bi = 0; bi < 3; ++bi) {
    const long Bp = rep.box_points[static_cast<size_t>(bi)];
    KahanSum acc;
    size_t cells = 1;
    for (int i = 0; i < k; ++i) cells *= static_cast<size_t>(Bp);
    for (size_t idx = 0; idx < cells; ++idx) {
      size_t rest = idx;
      double dprod = 1.0;
      for (int i = 0; i < k; ++i) {
        d[static_cast<size_t>(i)] =
            static_cast<long>(rest % static_cast<size_t>(Bp)) + 1;
        dprod *= static_cast<double>(d[static_cast<size_t>(i)]);
        rest /= static_cast<size_t>(Bp);
      }
      // index into the full-box table
      size_t full_idx = 0, stride = 1;
      for (int i = 0; i < k; ++i) {
        full_idx += static_cast<size_t>(d[static_cast<size_t>(i)] - 1) * stride;
        stride *= static_cast<size_t>(B);
      }
      acc.add(habs[full_idx] * std::pow(dprod, -expo));
    }
    rep.partial_sums[static_cast<size_t>(bi)] = acc.value();
  }
  rep.increments[0] = rep.partial_sums[1] - rep.partial_sums[0];
  rep.increments[1] = rep.partial_sums[2] - rep.partial_sums[1];
  rep.increments_shrink = rep.increments[1] <= rep.increments[0];
  return rep;
}

}  // namespace lcmavg
