#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "lcmavg/euler_product.hpp"
#include "lcmavg/zeta.hpp"

using namespace lcmavg;

TEST_CASE("k=2 lcm constant for id_1 matches zeta(3)/zeta(2)") {
  auto id1 = make_function("id_r", 1.0);
  const auto res = euler_product(id1, 2, Kernel::lcm_max, 1e-8);
  const double truth = zeta(3.0) / zeta(2.0);
  CHECK(std::abs(res.value - truth) <= 1e-8);
  CHECK(std::abs(res.value - truth) <= res.error_estimate);
  CHECK(std::abs(res.value - 0.7307629694014385) <= 1e-8);
  CHECK(res.prime_cutoff >= 100);
  CHECK(res.error_estimate >= 0.0);
}

TEST_CASE("squarefree-indicator constant is 1/zeta(2)^k") {
  auto mu2 = make_function("mu_squared", 0.0);
  const double z2 = zeta(2.0);
  for (int k : {2, 3}) {
    const auto res = euler_product(mu2, k, Kernel::lcm_max, 1e-8);
    CHECK(std::abs(res.value - std::pow(z2, -k)) <= 1e-8);
  }
  const auto r2 = euler_product(mu2, 2, Kernel::lcm_max, 1e-8);
  CHECK(std::abs(r2.value - 0.36957536116863607) <= 1e-8);
  const auto r3 = euler_product(mu2, 3, Kernel::lcm_max, 1e-8);
  CHECK(std::abs(r3.value - 0.22467487823190410) <= 1e-8);
}

TEST_CASE("ratio kernel k=2 gives zeta(2r+2)/zeta(2)") {
  for (double r : {0.5, 1.0, 2.0}) {
    auto f = make_function("id_r", r);
    const auto res = euler_product(f, 2, Kernel::ratio_max_minus_min, 1e-8);
    const double truth = zeta(2.0 * r + 2.0) / zeta(2.0);
    CHECK(std::abs(res.value - truth) <= 1e-8);
  }
}

TEST_CASE("constant-one function short-circuits to exactly 1") {
  for (const char* name : {"one", "id_r"}) {
    auto f = make_function(name, 0.0);
    for (int k : {2, 3, 4}) {
      for (Kernel kern : {Kernel::lcm_max, Kernel::ratio_max_minus_min}) {
        const auto res = euler_product(f, k, kern, 1e-10);
        CHECK(res.value == 1.0);
        CHECK(res.error_estimate == 0.0);
      }
    }
  }
}

TEST_CASE("result is independent of the worker count") {
  auto sigma = make_function("sigma_r", 1.0);
  const auto a = euler_product(sigma, 2, Kernel::lcm_max, 1e-7, {}, 1);
  const auto b = euler_product(sigma, 2, Kernel::lcm_max, 1e-7, {}, 2);
  const auto c = euler_product(sigma, 2, Kernel::lcm_max, 1e-7, {}, 7);
  CHECK(a.value == b.value);
  CHECK(b.value == c.value);
  CHECK(a.error_estimate == b.error_estimate);
}

// Runs a single pass at exactly P with the exponent budget pinned by a tiny
// tolerance; the unreachable tolerance makes the engine hand back its best
// value and estimate through the not-met exception.
namespace {
std::pair<double, double> single_pass(const MultiplicativeFunction& f, long P) {
  EulerProductCaps caps;
  caps.prime_start = P;
  caps.prime_cap = P;
  try {
    const auto res = euler_product(f, 2, Kernel::lcm_max, 1e-13, caps);
    return {res.value, res.error_estimate};
  } catch (const ToleranceNotMet& e) {
    return {e.best_value, e.error_estimate};
  }
}
}  // namespace

TEST_CASE("error estimate does not grow as the prime cutoff grows") {
  auto id1 = make_function("id_r", 1.0);
  double last = HUGE_VAL;
  for (long P : {10'000L, 40'000L, 160'000L}) {
    const auto [value, estimate] = single_pass(id1, P);
    CHECK(value > 0.0);
    CHECK(estimate <= last);
    last = estimate;
  }
}

TEST_CASE("the error estimate is honest against a known constant") {
  auto id1 = make_function("id_r", 1.0);
  const double truth = zeta(3.0) / zeta(2.0);
  for (long P : {50'000L, 400'000L}) {
    const auto [value, estimate] = single_pass(id1, P);
    CHECK(std::abs(value - truth) <= estimate);
  }
}

TEST_CASE("the error estimate is honest across the kernel zoo") {
  auto pass_at = [](const MultiplicativeFunction& f, int k, Kernel kern,
                    long P) {
    EulerProductCaps caps;
    caps.prime_start = P;
    caps.prime_cap = P;
    try {
      const auto r = euler_product(f, k, kern, 1e-13, caps);
      return std::pair(r.value, r.error_estimate);
    } catch (const ToleranceNotMet& e) {
      return std::pair(e.best_value, e.error_estimate);
    }
  };
  for (double r : {0.5, 2.0}) {
    auto f = make_function("id_r", r);
    const double truth = zeta(r + 2.0) / zeta(2.0);
    for (long P : {20'000L, 100'000L}) {
      const auto [v, e] = pass_at(f, 2, Kernel::lcm_max, P);
      INFO("lcm id_" << r << " P=" << P);
      CHECK(std::abs(v - truth) <= e);
    }
  }
  {
    auto f = make_function("id_r", 1.0);
    const auto [v, e] = pass_at(f, 2, Kernel::ratio_max_minus_min, 20'000);
    CHECK(std::abs(v - zeta(4.0) / zeta(2.0)) <= e);
  }
  {
    auto mu2 = make_function("mu_squared", 0.0);
    const auto [v, e] = pass_at(mu2, 3, Kernel::lcm_max, 20'000);
    CHECK(std::abs(v - std::pow(zeta(2.0), -3)) <= e);
  }
}

TEST_CASE("unreachable tolerance raises with the best value attached") {
  auto id1 = make_function("id_r", 1.0);
  EulerProductCaps caps;
  caps.prime_start = 1'000;
  caps.prime_cap = 2'000;
  try {
    euler_product(id1, 2, Kernel::lcm_max, 1e-12, caps);
    FAIL("expected ToleranceNotMet");
  } catch (const ToleranceNotMet& e) {
    CHECK(e.best_value == doctest::Approx(zeta(3.0) / zeta(2.0)).epsilon(1e-4));
    CHECK(e.error_estimate > 1e-12);
  }
}

TEST_CASE("kernel admissibility") {
  auto idm1 = make_function("id_r", -1.0);
  CHECK_THROWS_AS(euler_product(idm1, 2, Kernel::lcm_max, 1e-6), DomainError);
  auto idneg = make_function("id_r", -0.5);
  CHECK_THROWS_AS(euler_product(idneg, 2, Kernel::ratio_max_minus_min, 1e-6),
                  DomainError);
  // -1 < r < 0 is admissible for the lcm kernel
  const auto res = euler_product(idneg, 2, Kernel::lcm_max, 1e-6);
  CHECK(res.value > 0.0);
  auto id1 = make_function("id_r", 1.0);
  CHECK_THROWS_AS(euler_product(id1, 1, Kernel::lcm_max, 1e-6), ConfigError);
  CHECK_THROWS_AS(euler_product(id1, 2, Kernel::lcm_max, 0.0), ConfigError);
}
