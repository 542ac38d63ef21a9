#pragma once

#include <gmpxx.h>

#include <cstdint>

namespace lcmavg {

namespace detail {

inline mpz_class mpz_from_i128(__int128 v) {
  bool neg = v < 0;
  unsigned __int128 mag = neg ? -static_cast<unsigned __int128>(v)
                              : static_cast<unsigned __int128>(v);
  mpz_class out = static_cast<unsigned long>(mag >> 64);
  out <<= 64;
  out += static_cast<unsigned long>(mag & 0xFFFFFFFFFFFFFFFFULL);
  if (neg) out = -out;
  return out;
}

}  // namespace detail

// Exact signed integer accumulator: a 128-bit fast lane that spills into an
// arbitrary-precision total when the fast lane would wrap. Addition is
// associative and commutative here, so totals do not depend on the order
// chunks are merged in.
class ExactAccumulator {
 public:
  void add(long v) { add_i128(static_cast<__int128>(v)); }

  void add_i128(__int128 v) {
    __int128 t;
    if (__builtin_add_overflow(fast_, v, &t)) {
      spill();
      fast_ = v;
    } else {
      fast_ = t;
    }
  }

  void add(const mpz_class& v) {
    spill();
    big_ += v;
  }

  void merge(const ExactAccumulator& other) {
    big_ += other.big_;
    add_i128(other.fast_);
  }

  mpz_class total() const { return big_ + detail::mpz_from_i128(fast_); }

 private:
  void spill() {
    if (fast_ != 0) {
      big_ += detail::mpz_from_i128(fast_);
      fast_ = 0;
    }
  }

  __int128 fast_ = 0;
  mpz_class big_ = 0;
};

}  // namespace lcmavg
