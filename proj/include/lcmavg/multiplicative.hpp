#pragma once

#include <gmpxx.h>

#include <cmath>
#include <string>
#include <vector>

#include "lcmavg/errors.hpp"
#include "lcmavg/primes.hpp"

namespace lcmavg {

// A one-variable multiplicative function, defined by its values on prime
// powers and carrying its growth exponent r. Values at general n always go
// through the factorization, so multiplicativity holds by construction.
//
// Two evaluation lanes:
//   * scaled_pp(p, nu) = f(p^nu) / p^(nu*r), a bounded ratio that stays
//     representable for any real r and any prime; all kernel code uses it.
//   * pp_exact / eval_exact, arbitrary-precision integers, available when
//     integer_valued (integral r >= 0, or mu^2 / the constant one).
class MultiplicativeFunction {
 public:
  enum class Kind {
    id_r,
    sigma_r,
    beta_r,
    phi_r,
    psi_r,
    sigma_pow_r,
    beta_pow_r,
    phi_pow_r,
    psi_pow_r,
    unitary_phi_pow_r,
    unitary_sigma_pow_r,
    exp_sigma_pow_r,
    mu_squared,
    one,
  };

  MultiplicativeFunction(Kind kind, std::string name, double r)
      : kind_(kind), name_(std::move(name)), r_(r) {
    if (kind_ == Kind::mu_squared || kind_ == Kind::one) r_ = 0.0;
    integer_valued_ = r_ >= 0.0 && r_ == std::floor(r_);
    constant_one_ =
        kind_ == Kind::one ||
        (r_ == 0.0 && (kind_ == Kind::id_r || kind_ == Kind::sigma_pow_r ||
                       kind_ == Kind::beta_pow_r || kind_ == Kind::phi_pow_r ||
                       kind_ == Kind::psi_pow_r ||
                       kind_ == Kind::unitary_phi_pow_r ||
                       kind_ == Kind::unitary_sigma_pow_r ||
                       kind_ == Kind::exp_sigma_pow_r));
  }

  Kind kind() const { return kind_; }
  const std::string& name() const { return name_; }
  double r() const { return r_; }
  bool integer_valued() const { return integer_valued_; }
  // True when f(p^nu) == 1 identically (id_0, power variants at r = 0, 1).
  bool constant_one() const { return constant_one_; }

  // f(p^nu) / p^(nu*r) for nu >= 1.
  double scaled_pp(i64 p, int nu) const {
    const double pr = std::pow(static_cast<double>(p), -r_);
    switch (kind_) {
      case Kind::id_r:
        return 1.0;
      case Kind::sigma_r: {
        double s = 0.0, term = 1.0;
        for (int i = 0; i <= nu; ++i) {
          s += term;
          term *= pr;
        }
        return s;
      }
      case Kind::beta_r: {
        double s = 0.0, term = 1.0;
        for (int i = 0; i <= nu; ++i) {
          s += (i % 2 == 0 ? term : -term);
          term *= pr;
        }
        return s;
      }
      case Kind::phi_r:
        return 1.0 - pr;
      case Kind::psi_r:
        return 1.0 + pr;
      case Kind::sigma_pow_r:
        return std::pow(base_ratio_sigma(p, nu), r_);
      case Kind::beta_pow_r:
        return std::pow(base_ratio_beta(p, nu), r_);
      case Kind::phi_pow_r:
        return std::pow(1.0 - 1.0 / static_cast<double>(p), r_);
      case Kind::psi_pow_r:
        return std::pow(1.0 + 1.0 / static_cast<double>(p), r_);
      case Kind::unitary_phi_pow_r:
        return std::pow(1.0 - std::pow(static_cast<double>(p), -nu), r_);
      case Kind::unitary_sigma_pow_r:
        return std::pow(1.0 + std::pow(static_cast<double>(p), -nu), r_);
      case Kind::exp_sigma_pow_r: {
        double s = 0.0;
        for (int d = 1; d <= nu; ++d) {
          if (nu % d == 0) s += std::pow(static_cast<double>(p), d - nu);
        }
        return std::pow(s, r_);
      }
      case Kind::mu_squared:
        return nu <= 1 ? 1.0 : 0.0;
      case Kind::one:
        return 1.0;
    }
    return 0.0;
  }

  // f(p^nu) as a double.
  double pp(i64 p, int nu) const {
    return scaled_pp(p, nu) * std::pow(static_cast<double>(p), nu * r_);
  }

  // f(p^nu) as an exact integer; requires integer_valued().
  mpz_class pp_exact(i64 p, int nu) const {
    if (!integer_valued_)
      throw DomainError("pp_exact: function is not integer valued (name=" +
                        name_ + ", r=" + std::to_string(r_) + ")");
    const unsigned long ir = static_cast<unsigned long>(r_);
    const mpz_class zp = static_cast<long>(p);
    switch (kind_) {
      case Kind::id_r:
        return pow_ui(zp, ir * static_cast<unsigned long>(nu));
      case Kind::sigma_r: {
        mpz_class s = 0, pk = 1, step = pow_ui(zp, ir);
        for (int j = 0; j <= nu; ++j) {
          s += pk;
          pk *= step;
        }
        return s;
      }
      case Kind::beta_r: {
        mpz_class s = 0, pk = 1, step = pow_ui(zp, ir);
        for (int j = 0; j <= nu; ++j) {
          // sign (-1)^(nu-j)
          if ((nu - j) % 2 == 0) {
            s += pk;
          } else {
            s -= pk;
          }
          pk *= step;
        }
        return s;
      }
      case Kind::phi_r:
        return pow_ui(zp, ir * static_cast<unsigned long>(nu)) -
               pow_ui(zp, ir * static_cast<unsigned long>(nu - 1));
      case Kind::psi_r:
        return pow_ui(zp, ir * static_cast<unsigned long>(nu)) +
               pow_ui(zp, ir * static_cast<unsigned long>(nu - 1));
      case Kind::sigma_pow_r:
        return pow_ui(base_sigma(zp, nu), ir);
      case Kind::beta_pow_r:
        return pow_ui(base_beta(zp, nu), ir);
      case Kind::phi_pow_r:
        return pow_ui(pow_ui(zp, nu) - pow_ui(zp, nu - 1), ir);
      case Kind::psi_pow_r:
        return pow_ui(pow_ui(zp, nu) + pow_ui(zp, nu - 1), ir);
      case Kind::unitary_phi_pow_r:
        return pow_ui(pow_ui(zp, nu) - 1, ir);
      case Kind::unitary_sigma_pow_r:
        return pow_ui(pow_ui(zp, nu) + 1, ir);
      case Kind::exp_sigma_pow_r: {
        mpz_class s = 0;
        for (int d = 1; d <= nu; ++d) {
          if (nu % d == 0) s += pow_ui(zp, d);
        }
        return pow_ui(s, ir);
      }
      case Kind::mu_squared:
        return nu <= 1 ? 1 : 0;
      case Kind::one:
        return 1;
    }
    return 0;
  }

  // f(p^nu) in unsigned 128-bit arithmetic. Returns false when the value
  // does not fit (callers fall back to pp_exact) or the function is not
  // integer valued.
  bool pp_u128(i64 p, int nu, unsigned __int128& out) const {
    if (!integer_valued_) return false;
    using u128 = unsigned __int128;
    const int ir = static_cast<int>(r_);
    const u128 up = static_cast<u128>(p);
    auto pw = [&](int e, u128& res) {
      res = 1;
      for (int i = 0; i < e; ++i) {
        if (__builtin_mul_overflow(res, up, &res)) return false;
      }
      return true;
    };
    switch (kind_) {
      case Kind::id_r:
        return pw(ir * nu, out);
      case Kind::sigma_r: {
        u128 step, pk = 1, s = 0;
        if (!pw(ir, step)) return false;
        for (int j = 0;; ++j) {
          if (__builtin_add_overflow(s, pk, &s)) return false;
          if (j == nu) break;
          if (__builtin_mul_overflow(pk, step, &pk)) return false;
        }
        out = s;
        return true;
      }
      case Kind::beta_r: {
        // alternating partial sums of decreasing terms stay nonnegative
        u128 step, t = 1;
        if (!pw(ir, step)) return false;
        if (step == 0) return false;
        if (!pw(ir * nu, t)) return false;
        u128 acc = t;
        bool minus = true;
        for (int j = nu - 1; j >= 0; --j) {
          t = ir == 0 ? 1 : t / step;
          acc = minus ? acc - t : acc + t;
          minus = !minus;
        }
        out = acc;
        return true;
      }
      case Kind::phi_r: {
        u128 hi, lo;
        if (!pw(ir * nu, hi) || !pw(ir * (nu - 1), lo)) return false;
        out = hi - lo;
        return true;
      }
      case Kind::psi_r: {
        u128 hi, lo;
        if (!pw(ir * nu, hi) || !pw(ir * (nu - 1), lo)) return false;
        return !__builtin_add_overflow(hi, lo, &out);
      }
      case Kind::sigma_pow_r:
      case Kind::beta_pow_r:
      case Kind::phi_pow_r:
      case Kind::psi_pow_r:
      case Kind::unitary_phi_pow_r:
      case Kind::unitary_sigma_pow_r:
      case Kind::exp_sigma_pow_r: {
        u128 base = 0;
        switch (kind_) {
          case Kind::sigma_pow_r: {
            u128 pk = 1, s = 0;
            for (int j = 0;; ++j) {
              if (__builtin_add_overflow(s, pk, &s)) return false;
              if (j == nu) break;
              if (__builtin_mul_overflow(pk, up, &pk)) return false;
            }
            base = s;
            break;
          }
          case Kind::beta_pow_r: {
            u128 t;
            if (!pw(nu, t)) return false;
            u128 acc = t;
            bool minus = true;
            for (int j = nu - 1; j >= 0; --j) {
              t /= up;
              acc = minus ? acc - t : acc + t;
              minus = !minus;
            }
            base = acc;
            break;
          }
          case Kind::phi_pow_r:
          case Kind::psi_pow_r: {
            u128 hi, lo;
            if (!pw(nu, hi) || !pw(nu - 1, lo)) return false;
            base = kind_ == Kind::phi_pow_r ? hi - lo : hi + lo;
            break;
          }
          case Kind::unitary_phi_pow_r:
          case Kind::unitary_sigma_pow_r: {
            u128 q;
            if (!pw(nu, q)) return false;
            base = kind_ == Kind::unitary_phi_pow_r ? q - 1 : q + 1;
            break;
          }
          case Kind::exp_sigma_pow_r: {
            u128 s = 0;
            for (int d = 1; d <= nu; ++d) {
              if (nu % d != 0) continue;
              u128 q;
              if (!pw(d, q)) return false;
              if (__builtin_add_overflow(s, q, &s)) return false;
            }
            base = s;
            break;
          }
          default:
            return false;
        }
        out = 1;
        for (int i = 0; i < ir; ++i) {
          if (__builtin_mul_overflow(out, base, &out)) return false;
        }
        return true;
      }
      case Kind::mu_squared:
        out = nu <= 1 ? 1 : 0;
        return true;
      case Kind::one:
        out = 1;
        return true;
    }
    return false;
  }

  // f(n) as a double: n^r times the product of scaled prime-power ratios.
  double eval(u64 n) const {
    double ratio = 1.0;
    for (const auto& [p, e] : factorize(n)) ratio *= scaled_pp(p, e);
    return ratio * std::pow(static_cast<double>(n), r_);
  }

  // f(n) as an exact integer; requires integer_valued().
  mpz_class eval_exact(u64 n) const {
    mpz_class v = 1;
    for (const auto& [p, e] : factorize(n)) v *= pp_exact(p, e);
    return v;
  }

 private:
  static mpz_class pow_ui(const mpz_class& base, unsigned long e) {
    mpz_class out;
    mpz_pow_ui(out.get_mpz_t(), base.get_mpz_t(), e);
    return out;
  }
  static mpz_class pow_ui(const mpz_class& base, int e) {
    return pow_ui(base, static_cast<unsigned long>(e));
  }
  // sigma(p^nu) / p^nu and beta(p^nu) / p^nu.
  static double base_ratio_sigma(i64 p, int nu) {
    double s = 0.0, term = 1.0, inv = 1.0 / static_cast<double>(p);
    for (int i = 0; i <= nu; ++i) {
      s += term;
      term *= inv;
    }
    return s;
  }
  static double base_ratio_beta(i64 p, int nu) {
    double s = 0.0, term = 1.0, inv = 1.0 / static_cast<double>(p);
    for (int i = 0; i <= nu; ++i) {
      s += (i % 2 == 0 ? term : -term);
      term *= inv;
    }
    return s;
  }
  static mpz_class base_sigma(const mpz_class& zp, int nu) {
    mpz_class s = 0, pk = 1;
    for (int j = 0; j <= nu; ++j) {
      s += pk;
      pk *= zp;
    }
    return s;
  }
  static mpz_class base_beta(const mpz_class& zp, int nu) {
    mpz_class s = 0, pk = 1;
    for (int j = 0; j <= nu; ++j) {
      if ((nu - j) % 2 == 0) {
        s += pk;
      } else {
        s -= pk;
      }
      pk *= zp;
    }
    return s;
  }

  Kind kind_;
  std::string name_;
  double r_;
  bool integer_valued_;
  bool constant_one_;
};

// Catalog lookup. Accepts the canonical identifiers (id_r, sigma_r, ...) as
// well as short aliases (id, sigma, mu2, ...). mu_squared and one ignore r.
inline MultiplicativeFunction make_function(const std::string& name, double r) {
  using Kind = MultiplicativeFunction::Kind;
  struct Entry {
    const char* canonical;
    const char* alias;
    Kind kind;
  };
  static const Entry entries[] = {
      {"id_r", "id", Kind::id_r},
      {"sigma_r", "sigma", Kind::sigma_r},
      {"beta_r", "beta", Kind::beta_r},
      {"phi_r", "phi", Kind::phi_r},
      {"psi_r", "psi", Kind::psi_r},
      {"sigma_pow_r", "sigma_pow", Kind::sigma_pow_r},
      {"beta_pow_r", "beta_pow", Kind::beta_pow_r},
      {"phi_pow_r", "phi_pow", Kind::phi_pow_r},
      {"psi_pow_r", "psi_pow", Kind::psi_pow_r},
      {"unitary_phi_pow_r", "unitary_phi", Kind::unitary_phi_pow_r},
      {"unitary_sigma_pow_r", "unitary_sigma", Kind::unitary_sigma_pow_r},
      {"exp_sigma_pow_r", "exp_sigma", Kind::exp_sigma_pow_r},
      {"mu_squared", "mu2", Kind::mu_squared},
      {"one", "1", Kind::one},
  };
  for (const Entry& e : entries) {
    if (name == e.canonical || name == e.alias) {
      return MultiplicativeFunction(e.kind, e.canonical, r);
    }
  }
  throw ConfigError("unknown function name: " + name);
}

inline std::vector<std::string> catalog_names() {
  return {"id_r",          "sigma_r",
          "beta_r",        "phi_r",
          "psi_r",         "sigma_pow_r",
          "beta_pow_r",    "phi_pow_r",
          "psi_pow_r",     "unitary_phi_pow_r",
          "unitary_sigma_pow_r", "exp_sigma_pow_r",
          "mu_squared",    "one"};
}

// Observed growth constants of f against the exponent r, scanned over a
// finite range of primes and exponents. C1 watches |f(p) - p^r| / p^(r-1/2),
// C2 watches |f(p^nu)| / p^(nu r) for nu >= 2.
struct ClassReport {
  double r = 0.0;
  double C1_observed = 0.0;
  double C2_observed = 0.0;
  double C3_derived = 0.0;
  i64 prime_limit = 0;
  int exponent_limit = 0;
};

inline ClassReport check_class_membership(const MultiplicativeFunction& f,
                                          double r, i64 prime_limit,
                                          int exponent_limit) {
  if (prime_limit < 2 || exponent_limit < 2)
    throw ConfigError("check_class_membership: limits must be >= 2");
  ClassReport rep;
  rep.r = r;
  rep.prime_limit = prime_limit;
  rep.exponent_limit = exponent_limit;
  const double dr = f.r() - r;
  for (i64 p : sieve_primes(prime_limit)) {
    const double pd = static_cast<double>(p);
    // f(p^nu) / p^(nu r), computed from the scaled ratio at f's own r.
    auto ratio_at = [&](int nu) {
      return f.scaled_pp(p, nu) * std::pow(pd, nu * dr);
    };
    rep.C1_observed =
        std::max(rep.C1_observed, std::abs(ratio_at(1) - 1.0) * std::sqrt(pd));
    for (int nu = 2; nu <= exponent_limit; ++nu) {
      rep.C2_observed = std::max(rep.C2_observed, std::abs(ratio_at(nu)));
    }
  }
  rep.C3_derived = std::max(rep.C1_observed + 1.0, rep.C2_observed);
  return rep;
}

}  // namespace lcmavg
