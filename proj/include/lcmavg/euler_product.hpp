#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "lcmavg/errors.hpp"
#include "lcmavg/kahan.hpp"
#include "lcmavg/local_factor.hpp"
#include "lcmavg/multiplicative.hpp"
#include "lcmavg/parallel.hpp"
#include "lcmavg/primes.hpp"
#include "lcmavg/zeta.hpp"

namespace lcmavg {

enum class Kernel { lcm_max, ratio_max_minus_min };

inline const char* kernel_name(Kernel k) {
  return k == Kernel::lcm_max ? "lcm" : "ratio";
}

struct EulerProductCaps {
  i64 prime_start = 100'000;
  i64 prime_cap = 10'000'000;
  int exponent_cap = 64;
};

struct EulerProductResult {
  double value = 0.0;
  i64 prime_cutoff = 0;
  int exponent_cutoff = 0;
  double error_estimate = 0.0;
  Kernel kernel = Kernel::lcm_max;
};

namespace detail {

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  bool ok = false;
};

inline LineFit fit_line(std::span<const double> xs, std::span<const double> ys) {
  LineFit f;
  const size_t n = xs.size();
  if (n < 2) return f;
  double sx = 0, sy = 0;
  for (size_t i = 0; i < n; ++i) {
    sx += xs[i];
    sy += ys[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0;
  for (size_t i = 0; i < n; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  if (sxx <= 0) return f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.ok = true;
  return f;
}

// The amount a power-law model c * p^-s attributes to the primes beyond the
// cutoff. Extrapolated through the prime zeta function rather than an
// integral so the prime counting irregularity does not enter.
inline double model_tail(double c, double s, std::span<const i64> primes) {
  s = std::clamp(s, 1.05, 24.0);
  return c * prime_zeta_tail(s, primes);
}

struct TailModel {
  double correction = 0.0;   // signed, to be added to the log-product
  double uncertainty = 0.0;  // heuristic bound on the correction's error
};

// Fits |factor - 1| ~ c * p^-s over the last decade of primes and converts
// the fit into a signed tail correction beyond the cutoff. The model risk is
// measured out of sample: a fit on the inner half-decade must predict the
// directly-computed deviation mass of the outer half-decade; its relative
// miss there, plus the drift between the half-window and full-window tail
// extrapolations, scales the reported uncertainty.
inline TailModel fit_cross_prime_tail(std::span<const i64> primes,
                                      std::span<const double> deltas) {
  TailModel out;
  const i64 P = primes.back();
  const double lo_bound = static_cast<double>(P) / 10.0;
  const double mid_bound = static_cast<double>(P) / std::sqrt(10.0);
  constexpr double kNoiseFloor = 1e-13;

  std::vector<double> lx, ly, lx_lo, ly_lo;
  std::vector<size_t> hi_index;
  int n_pos = 0, n_neg = 0;
  double max_abs = 0.0;
  for (size_t i = 0; i < primes.size(); ++i) {
    const double p = static_cast<double>(primes[i]);
    if (p <= lo_bound) continue;
    const double d = deltas[i];
    max_abs = std::max(max_abs, std::abs(d));
    if (p > mid_bound) hi_index.push_back(i);
    if (std::abs(d) <= kNoiseFloor) continue;
    (d > 0 ? n_pos : n_neg)++;
    const double a = std::log(p), b = std::log(std::abs(d));
    lx.push_back(a);
    ly.push_back(b);
    if (p <= mid_bound) {
      lx_lo.push_back(a);
      ly_lo.push_back(b);
    }
  }

  if (max_abs <= kNoiseFloor) {
    // Factors indistinguishable from 1 across the whole window; the product
    // has converged to working precision.
    out.uncertainty = kNoiseFloor;
    return out;
  }

  const int n_total = n_pos + n_neg;
  const int n_minor = std::min(n_pos, n_neg);
  const LineFit full = fit_line(lx, ly);
  if (n_total < 12 || n_minor > n_total / 10 || !full.ok ||
      -full.slope < 1.05) {
    // Mixed-sign or unstable window: no correction, bound the tail by the
    // slowest decay the deviations of this function class can have.
    double cmax = 0.0;
    for (size_t i = 0; i < primes.size(); ++i) {
      const double p = static_cast<double>(primes[i]);
      if (p <= lo_bound) continue;
      cmax = std::max(cmax, std::abs(deltas[i]) * std::pow(p, 1.5));
    }
    out.uncertainty = 2.0 * model_tail(cmax, 1.5, primes) + kNoiseFloor;
    return out;
  }

  const double sign = n_pos >= n_neg ? 1.0 : -1.0;
  const double tail_full =
      model_tail(std::exp(full.intercept), -full.slope, primes);
  out.correction = sign * tail_full;

  // Out-of-sample check of the inner-half fit against the outer half.
  double rel_miss = 1.0;
  double drift = tail_full;
  const LineFit inner = fit_line(lx_lo, ly_lo);
  if (inner.ok && -inner.slope >= 1.05 && hi_index.size() >= 8) {
    const double c_in = std::exp(inner.intercept), s_in = -inner.slope;
    KahanSum actual, predicted;
    for (size_t i : hi_index) {
      actual.add(deltas[i]);
      predicted.add(sign * c_in *
                    std::pow(static_cast<double>(primes[i]), -s_in));
    }
    if (std::abs(actual.value()) > kNoiseFloor) {
      rel_miss = std::abs(predicted.value() - actual.value()) /
                 std::abs(actual.value());
      drift = std::abs(model_tail(c_in, s_in, primes) - tail_full);
    }
  }
  out.uncertainty =
      tail_full * (3.0 * rel_miss + 0.002) + 2.0 * drift + kNoiseFloor;
  return out;
}

}  // namespace detail

struct PrimeProductResult {
  double value = 0.0;
  i64 prime_cutoff = 0;
  int exponent_cutoff = 0;
  double error_estimate = 0.0;
};

// Adaptive product over primes of local(p, eps, max_v) -> LocalFactorResult.
// Local factors are accumulated in log space (compensated, ascending primes,
// fixed chunk grid) so the result does not depend on the worker count. The
// prime cutoff grows until the combined error estimate (per-prime exponent
// tails + cross-prime tail model) is below tol, or the cap is hit.
template <typename LocalFn>
PrimeProductResult adaptive_prime_product(LocalFn&& local, double tol,
                                          const EulerProductCaps& caps,
                                          int workers = 1) {
  if (!(tol > 0)) throw ConfigError("prime product: tolerance must be > 0");
  if (caps.prime_start < 100 || caps.prime_cap < caps.prime_start)
    throw ConfigError("prime product: bad prime caps");

  const double exp_budget = tol / 4.0;
  i64 P = std::min(caps.prime_start, caps.prime_cap);
  PrimeProductResult best;
  for (;;) {
    const std::vector<i64> primes = sieve_primes(P);
    const size_t n = primes.size();
    std::vector<double> deltas(n);
    constexpr size_t kChunk = 8192;
    const int n_chunks = static_cast<int>((n + kChunk - 1) / kChunk);
    std::vector<KahanSum> log_parts(static_cast<size_t>(n_chunks));
    std::vector<KahanSum> tail_parts(static_cast<size_t>(n_chunks));
    std::vector<int> vmax_parts(static_cast<size_t>(n_chunks), 0);
    run_chunks(n_chunks, workers, [&](int c, int /*worker*/) {
      const size_t begin = static_cast<size_t>(c) * kChunk;
      const size_t end = std::min(begin + kChunk, n);
      KahanSum logs, tails;
      int vmax = 0;
      for (size_t i = begin; i < end; ++i) {
        // Per-prime exponent budget, spent on a 1/i^2 schedule so the total
        // stays below exp_budget for any cutoff.
        const double eps =
            exp_budget * (6.0 / (M_PI * M_PI)) /
            (static_cast<double>(i + 1) * static_cast<double>(i + 1));
        const LocalFactorResult f = local(primes[i], eps);
        deltas[i] = f.value - 1.0;
        logs.add(std::log1p(deltas[i]));
        tails.add(f.tail_estimate / std::max(std::abs(f.value), 0.05));
        vmax = std::max(vmax, f.exponent_cutoff);
      }
      log_parts[static_cast<size_t>(c)] = logs;
      tail_parts[static_cast<size_t>(c)] = tails;
      vmax_parts[static_cast<size_t>(c)] = vmax;
    });
    KahanSum log_sum, tail_sum;
    int vmax = 0;
    for (int c = 0; c < n_chunks; ++c) {
      log_sum.merge(log_parts[static_cast<size_t>(c)]);
      tail_sum.merge(tail_parts[static_cast<size_t>(c)]);
      vmax = std::max(vmax, vmax_parts[static_cast<size_t>(c)]);
    }

    const detail::TailModel model = detail::fit_cross_prime_tail(primes, deltas);
    const double value = std::exp(log_sum.value() + model.correction);
    const double log_err = tail_sum.value() + model.uncertainty + 5e-15;
    best.value = value;
    best.prime_cutoff = P;
    best.exponent_cutoff = vmax;
    best.error_estimate = std::abs(value) * log_err;
    if (best.error_estimate <= tol) return best;
    if (P >= caps.prime_cap) {
      char msg[160];
      std::snprintf(msg, sizeof(msg),
                    "prime product: error estimate %.3e above tolerance %.3e "
                    "at the prime cap %lld",
                    best.error_estimate, tol,
                    static_cast<long long>(P));
      throw ToleranceNotMet(msg, best.value, best.error_estimate);
    }
    P = std::min(P * 4, caps.prime_cap);
  }
}

// The mean-value constant of f over the chosen kernel: the product over all
// primes of the local k-tuple exponent factor. For the function that is
// identically 1 every local factor telescopes to 1 exactly and the product
// short-circuits.
inline EulerProductResult euler_product(const MultiplicativeFunction& f, int k,
                                        Kernel kernel, double target_tol,
                                        const EulerProductCaps& caps = {},
                                        int workers = 1) {
  if (k < 2) throw ConfigError("euler_product: k must be >= 2");
  if (!(target_tol > 0))
    throw ConfigError("euler_product: tolerance must be > 0");
  const double r = f.r();
  if (kernel == Kernel::lcm_max && !(r > -1.0))
    throw DomainError("euler_product: lcm kernel requires r > -1");
  if (kernel == Kernel::ratio_max_minus_min && !(r >= 0.0))
    throw DomainError("euler_product: ratio kernel requires r >= 0");

  EulerProductResult out;
  out.kernel = kernel;
  if (f.constant_one()) {
    out.value = 1.0;
    return out;
  }

  // Observed bound on |f(p^m)| / p^(rm); the small primes dominate for the
  // whole catalog.
  double c3 = 1.0;
  for (i64 p : sieve_primes(100)) {
    for (int m = 1; m <= 20; ++m)
      c3 = std::max(c3, std::abs(f.scaled_pp(p, m)));
  }
  c3 *= 1.25;

  auto local = [&](i64 p, double eps) {
    const int V = choose_exponent_cutoff(f, k, p, eps, caps.exponent_cap, c3);
    return kernel == Kernel::lcm_max ? local_factor_lcm(f, k, p, V, c3)
                                     : local_factor_ratio(f, k, p, V, c3);
  };
  const PrimeProductResult r0 =
      adaptive_prime_product(local, target_tol, caps, workers);
  out.value = r0.value;
  out.prime_cutoff = r0.prime_cutoff;
  out.exponent_cutoff = r0.exponent_cutoff;
  out.error_estimate = r0.error_estimate;
  return out;
}

}  // namespace lcmavg
