#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>

#include "lcmavg/h_coefficients.hpp"

using namespace lcmavg;

namespace {

long at2(const HCoefficientTable<mpz_class>& t, long a, long b,
         mpz_class* out = nullptr) {
  const long d[] = {a, b};
  const mpz_class& v = t.at(std::span<const long>(d, 2));
  if (out) *out = v;
  return v.get_si();
}

}  // namespace

TEST_CASE("frozen h values for id_1, k=2") {
  auto id1 = make_function("id_r", 1.0);
  const auto t = h_table_exact(id1, 2, 16);
  CHECK(at2(t, 1, 1) == 1);
  // h(p, 1) = [p,1] - p*[1,1] = 0
  for (long p : {2L, 3L, 5L, 7L, 11L, 13L}) CHECK(at2(t, p, 1) == 0);
  // h(p, p) = p - 2p^2 + p^2 = p - p^2
  for (long p : {2L, 3L, 5L, 7L}) CHECK(at2(t, p, p) == p - p * p);
  CHECK(at2(t, 2, 2) == -2);
}

TEST_CASE("h(1,...,1) = 1 for the whole catalog") {
  for (const std::string& name : catalog_names()) {
    auto f = make_function(name, 1.0);
    const auto t = h_table_exact(f, 2, 2);
    const long ones[] = {1, 1};
    CHECK(t.at(std::span<const long>(ones, 2)) == 1);
  }
  auto fr = make_function("id_r", 0.5);
  const auto tr = h_table_real(fr, 2, 2);
  const long ones[] = {1, 1};
  CHECK(tr.at(std::span<const long>(ones, 2)) == doctest::Approx(1.0));
}

TEST_CASE("first-order vanishing for id_r") {
  for (double r : {1.0, 2.0}) {
    auto f = make_function("id_r", r);
    const auto t = h_table_exact(f, 2, 32);
    for (i64 p : sieve_primes(32)) {
      const long d[] = {static_cast<long>(p), 1};
      CHECK(t.at(std::span<const long>(d, 2)) == 0);
    }
  }
  // real lane: the single-series factors are absorbed for any real r
  auto fh = make_function("id_r", 0.5);
  const auto th = h_table_real(fh, 2, 32);
  for (i64 p : sieve_primes(32)) {
    const long d[] = {static_cast<long>(p), 1};
    CHECK(std::abs(th.at(std::span<const long>(d, 2))) <= 1e-12);
  }
}

TEST_CASE("h is multiplicative on coprime tuple pairs") {
  for (const char* name : {"id_r", "sigma_r", "phi_r", "mu_squared"}) {
    auto f = make_function(name, 1.0);
    const auto t = h_table_exact(f, 2, 36);
    for (long m1 : {1L, 2L, 4L, 3L}) {
      for (long m2 : {1L, 2L, 8L, 9L}) {
        for (long n1 : {1L, 5L, 7L, 35L}) {
          for (long n2 : {1L, 5L, 25L, 7L}) {
            if (std::gcd(m1 * m2, n1 * n2) != 1) continue;
            if (m1 * n1 > 36 || m2 * n2 > 36) continue;
            const long dm[] = {m1, m2}, dn[] = {n1, n2},
                       dmn[] = {m1 * n1, m2 * n2};
            INFO(name << " (" << m1 << "," << m2 << ")x(" << n1 << "," << n2
                      << ")");
            CHECK(t.at(std::span<const long>(dmn, 2)) ==
                  t.at(std::span<const long>(dm, 2)) *
                      t.at(std::span<const long>(dn, 2)));
          }
        }
      }
    }
  }
}

TEST_CASE("reconstruction is exact on the box") {
  for (const char* name : {"id_r", "sigma_r", "phi_r", "mu_squared"}) {
    auto f = make_function(name, 1.0);
    for (int k : {2, 3}) {
      const long x = k == 2 ? 16 : 10;
      INFO(name << " k=" << k);
      const auto rep = check_reconstruction(f, k, x);
      CHECK(rep.ok);
      CHECK(rep.tuples_checked ==
            static_cast<u64>(std::pow(static_cast<double>(x), k) + 0.5));
      CHECK_FALSE(rep.first_mismatch.has_value());
    }
  }
  // real lane
  auto fh = make_function("id_r", 0.5);
  CHECK(check_reconstruction(fh, 2, 10).ok);
}

TEST_CASE("local and global h computations agree at prime powers") {
  for (const char* name : {"id_r", "sigma_r", "phi_r", "mu_squared"}) {
    auto f = make_function(name, 1.0);
    for (int k : {2, 3}) {
      for (i64 p : {2, 3, 5}) {
        INFO(name << " k=" << k << " p=" << p);
        const auto rep = h_local_match(f, k, p, 4);
        CHECK(rep.ok);
        CHECK(rep.entries_checked == (k == 2 ? 25 : 125));
      }
    }
  }
  auto fh = make_function("id_r", 0.5);
  CHECK(h_local_match(fh, 2, 3, 4).ok);
  auto fphi = make_function("phi_r", 1.0);
  CHECK(h_local_match(fphi, 2, 3, 3).ok);
}

TEST_CASE("hand-expanded reconstruction at (p, p)") {
  // f = id_1: splittings of (p,p) give p^2 + p*0 + p*0 + (p - p^2) = p
  auto id1 = make_function("id_r", 1.0);
  const auto t = h_table_exact(id1, 2, 8);
  for (long p : {2L, 3L, 5L, 7L}) {
    mpz_class total = mpz_class(p) * p * at2(t, 1, 1);
    total += p * at2(t, 1, p);
    total += p * at2(t, p, 1);
    total += at2(t, p, p);
    CHECK(total == p);
  }
}

TEST_CASE("decay report partial sums shrink for r >= 0") {
  auto id1 = make_function("id_r", 1.0);
  const auto rep = h_decay_report(id1, 2, 64, 0.5);
  CHECK(rep.A == doctest::Approx(1.5));
  CHECK(rep.pass_applicable);
  CHECK(rep.partial_sums[0] <= rep.partial_sums[1]);
  CHECK(rep.partial_sums[1] <= rep.partial_sums[2]);
  CHECK(rep.increments_shrink);

  // increments over box points 64, 128, 256 also shrink
  const auto rep256 = h_decay_report(id1, 2, 256, 0.5);
  CHECK(rep256.box_points == std::array<long, 3>{64, 128, 256});
  CHECK(rep256.increments_shrink);

  // for f == 1 the inversion absorbs everything: h is the unit mass at
  // (1,...,1), so every partial sum is exactly 1
  auto one = make_function("one", 0.0);
  const auto t1 = h_table_exact(one, 2, 16);
  for (long a = 1; a <= 16; ++a) {
    for (long b = 1; b <= 16; ++b) {
      const long d[] = {a, b};
      CHECK(t1.at(std::span<const long>(d, 2)) ==
            ((a == 1 && b == 1) ? 1 : 0));
    }
  }
  const auto rep1 = h_decay_report(one, 2, 32, 0.5);
  CHECK(rep1.A == doctest::Approx(0.5));
  CHECK(rep1.partial_sums[0] == doctest::Approx(1.0));
  CHECK(rep1.partial_sums[2] == doctest::Approx(1.0));
}

TEST_CASE("large epsilon collapses the decay sum to h(1,...,1)") {
  auto id1 = make_function("id_r", 1.0);
  const auto rep = h_decay_report(id1, 2, 32, 10.0);
  CHECK(rep.partial_sums[2] >= 1.0);
  CHECK(rep.partial_sums[2] - 1.0 <= 1e-6);
}

TEST_CASE("negative r decay report is observational") {
  auto f = make_function("id_r", -0.5);
  const auto rep = h_decay_report(f, 2, 32, 0.5);
  CHECK(rep.A == doctest::Approx(0.25));
  CHECK_FALSE(rep.pass_applicable);
  for (double s : rep.partial_sums) CHECK(std::isfinite(s));
}

TEST_CASE("box and argument validation") {
  auto id1 = make_function("id_r", 1.0);
  CHECK_THROWS_AS(h_table_exact(id1, 5, 4), ConfigError);
  CHECK_THROWS_AS(h_table_exact(id1, 2, 0), ConfigError);
  CHECK_THROWS_AS(h_table_exact(id1, 3, 300), ResourceCapError);
  auto fr = make_function("id_r", 0.5);
  CHECK_THROWS_AS(h_table_exact(fr, 2, 8), ConfigError);
  CHECK_THROWS_AS(h_decay_report(id1, 2, 2, 0.5), ConfigError);
  CHECK_THROWS_AS(h_decay_report(id1, 2, 32, 0.0), ConfigError);
}
