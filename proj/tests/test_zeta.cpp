#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "lcmavg/zeta.hpp"

using namespace lcmavg;

namespace {

// Independent sandwich oracle: partial sum plus integral bounds,
//   S_N + N^(1-s)/(s-1) - N^-s <= zeta(s) - ... (crude but rigorous):
// sum_{n>N} n^-s lies between integral_{N+1}^inf and integral_N^inf.
struct Sandwich {
  double lo, hi;
};

Sandwich zeta_sandwich(double s, int N) {
  double partial = 0.0;
  for (int n = N; n >= 1; --n) partial += std::pow(n, -s);
  const double tail_lo = std::pow(N + 1.0, 1.0 - s) / (s - 1.0);
  const double tail_hi = std::pow(static_cast<double>(N), 1.0 - s) / (s - 1.0);
  return {partial + tail_lo, partial + tail_hi};
}

}  // namespace

TEST_CASE("zeta at the classical points") {
  const double pi = M_PI;
  CHECK(zeta(2.0) == doctest::Approx(pi * pi / 6.0).epsilon(1e-13));
  CHECK(zeta(4.0) ==
        doctest::Approx(pi * pi * pi * pi / 90.0).epsilon(1e-13));
  CHECK(zeta(6.0) == doctest::Approx(std::pow(pi, 6) / 945.0).epsilon(1e-13));
}

TEST_CASE("zeta lies inside the partial-sum sandwich") {
  for (double s : {1.25, 1.5, 2.0, 3.0, 4.5, 7.0}) {
    const Sandwich box = zeta_sandwich(s, 200'000);
    const double z = zeta(s);
    CHECK(z >= box.lo - 1e-11);
    CHECK(z <= box.hi + 1e-11);
  }
}

TEST_CASE("zeta(3) frozen to the known digits") {
  CHECK(zeta(3.0) == doctest::Approx(1.2020569031595943).epsilon(1e-13));
}

TEST_CASE("zeta domain and large arguments") {
  CHECK_THROWS_AS(zeta(1.0), DomainError);
  CHECK_THROWS_AS(zeta(0.5), DomainError);
  CHECK_THROWS_AS(zeta(-2.0), DomainError);
  CHECK(zeta(80.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(zeta(50.0) > 1.0);  // 2^-50 is still representable next to 1
}

TEST_CASE("prime zeta against a direct prime sum") {
  const auto primes = sieve_primes(2'000'000);
  for (double s : {1.6, 2.0, 3.0}) {
    double direct = 0.0;
    for (auto it = primes.rbegin(); it != primes.rend(); ++it)
      direct += std::pow(static_cast<double>(*it), -s);
    // the omitted primes above 2e6 contribute less than the integral bound
    const double tail_hi = std::pow(2e6, 1.0 - s) / ((s - 1.0) * std::log(2e6));
    const double pz = prime_zeta(s);
    CHECK(pz >= direct - 1e-12);
    CHECK(pz <= direct + 2.0 * tail_hi + 1e-12);
  }
  CHECK(prime_zeta(2.0) == doctest::Approx(0.45224742004106549).epsilon(1e-12));
}

TEST_CASE("prime zeta tail is consistent with the head") {
  const auto primes = sieve_primes(10'000);
  for (double s : {1.5, 2.0, 2.5}) {
    double head = 0.0;
    for (i64 p : primes) head += std::pow(static_cast<double>(p), -s);
    const double tail = prime_zeta_tail(s, primes);
    CHECK(tail >= 0.0);
    CHECK(head + tail == doctest::Approx(prime_zeta(s)).epsilon(1e-12));
  }
}
