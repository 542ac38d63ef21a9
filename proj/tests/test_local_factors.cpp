#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "lcmavg/local_factor.hpp"

using namespace lcmavg;

namespace {

// Direct k-fold summation over all exponent tuples with each nu <= V:
// the oracle the grouped evaluations must reproduce. Terms are computed in
// the same overflow-free scaled form.
double direct_cube_lcm(const MultiplicativeFunction& f, int k, i64 p, int V) {
  const double u = 1.0 / static_cast<double>(p);
  const double r = f.r();
  std::vector<int> nu(static_cast<size_t>(k), 0);
  double sum = 0.0;
  for (;;) {
    int mx = 0, total = 0;
    for (int v : nu) {
      mx = std::max(mx, v);
      total += v;
    }
    const double rho = mx == 0 ? 1.0 : f.scaled_pp(p, mx);
    sum += rho * std::pow(u, (r + 1.0) * total - r * mx);
    int i = k - 1;
    while (i >= 0 && nu[static_cast<size_t>(i)] == V) --i;
    if (i < 0) break;
    ++nu[static_cast<size_t>(i)];
    for (int j = i + 1; j < k; ++j) nu[static_cast<size_t>(j)] = 0;
  }
  return std::pow(1.0 - u, k) * sum;
}

double direct_cube_ratio(const MultiplicativeFunction& f, int k, i64 p,
                         int V) {
  const double u = 1.0 / static_cast<double>(p);
  const double r = f.r();
  std::vector<int> nu(static_cast<size_t>(k), 0);
  double sum = 0.0;
  for (;;) {
    int mx = 0, mn = V + 1, total = 0;
    for (int v : nu) {
      mx = std::max(mx, v);
      mn = std::min(mn, v);
      total += v;
    }
    const int d = mx - mn;
    const double rho = d == 0 ? 1.0 : f.scaled_pp(p, d);
    sum += rho * std::pow(u, (r + 1.0) * total - r * d);
    int i = k - 1;
    while (i >= 0 && nu[static_cast<size_t>(i)] == V) --i;
    if (i < 0) break;
    ++nu[static_cast<size_t>(i)];
    for (int j = i + 1; j < k; ++j) nu[static_cast<size_t>(j)] = 0;
  }
  return std::pow(1.0 - u, k) * sum;
}

}  // namespace

TEST_CASE("lcm kernel frozen examples") {
  auto one = make_function("one", 0.0);
  for (i64 p : {2, 3, 7}) {
    const auto res = local_factor_lcm(one, 2, p, 50);
    CHECK(res.value == doctest::Approx(1.0).epsilon(1e-12));
  }
  auto mu2 = make_function("mu_squared", 0.0);
  CHECK(local_factor_lcm(mu2, 2, 2, 2).value ==
        doctest::Approx(9.0 / 16.0).epsilon(1e-15));
  CHECK(local_factor_lcm(mu2, 2, 2, 40).value ==
        doctest::Approx(9.0 / 16.0).epsilon(1e-15));

  auto id1 = make_function("id_r", 1.0);
  // p-factor of zeta(3)/zeta(2) at p=2 is (1-2^-2)/(1-2^-3) = 6/7
  CHECK(local_factor_lcm(id1, 2, 2, 40).value ==
        doctest::Approx(6.0 / 7.0).epsilon(1e-10));
}

TEST_CASE("ratio kernel frozen examples") {
  auto one = make_function("one", 0.0);
  for (i64 p : {2, 5}) {
    CHECK(local_factor_ratio(one, 2, p, 50).value ==
          doctest::Approx(1.0).epsilon(1e-12));
    CHECK(local_factor_ratio(one, 3, p, 50).value ==
          doctest::Approx(1.0).epsilon(1e-12));
  }
  auto id1 = make_function("id_r", 1.0);
  // p-factor of zeta(4)/zeta(2) at p=2 is (1-2^-2)/(1-2^-4) = 0.8
  CHECK(local_factor_ratio(id1, 2, 2, 40).value ==
        doctest::Approx(0.8).epsilon(1e-10));
}

TEST_CASE("grouped kernels equal the direct tuple enumeration") {
  const double eps = 1e-12;
  for (const char* name :
       {"id_r", "sigma_r", "beta_r", "phi_r", "psi_r", "sigma_pow_r",
        "unitary_phi_pow_r", "exp_sigma_pow_r", "mu_squared", "one"}) {
    for (double r : {0.5, 1.0}) {
      auto f = make_function(name, r);
      for (int k : {2, 3}) {
        for (i64 p : {2, 3, 5}) {
          INFO(name << " r=" << r << " k=" << k << " p=" << p);
          const auto grouped = local_factor_lcm(f, k, p, 6);
          const double direct = direct_cube_lcm(f, k, p, 6);
          CHECK(grouped.value > 0.0);
          CHECK(std::abs(grouped.value - direct) <= eps);
          if (f.r() >= 0.0) {
            const auto grouped_ratio = local_factor_ratio(f, k, p, 6);
            const double direct_ratio = direct_cube_ratio(f, k, p, 6);
            CHECK(grouped_ratio.value > 0.0);
            CHECK(std::abs(grouped_ratio.value - direct_ratio) <= eps);
          }
        }
      }
    }
  }
  // negative r exercises the other convergence regime of the lcm kernel
  auto idneg = make_function("id_r", -0.5);
  for (i64 p : {2, 3, 5}) {
    const auto grouped = local_factor_lcm(idneg, 2, p, 6);
    CHECK(std::abs(grouped.value - direct_cube_lcm(idneg, 2, p, 6)) <= eps);
  }
}

TEST_CASE("inclusion-exclusion cell weights partition the cube") {
  // sum over 0<=a<=b<=V of W(a,b) must equal (sum_{nu<=V} t^nu)^k; with
  // f == 1 the ratio kernel's sum is exactly that, so compare against the
  // direct closed form.
  auto one = make_function("one", 0.0);
  for (int k : {2, 3, 4}) {
    for (i64 p : {2, 3, 7}) {
      for (int V : {1, 3, 6, 10}) {
        const double u = 1.0 / static_cast<double>(p);
        double sig = 0.0;
        for (int n = 0; n <= V; ++n) sig += std::pow(u, n);
        const double expected = std::pow(1.0 - u, k) * std::pow(sig, k);
        const auto got = local_factor_ratio(one, k, p, V);
        CHECK(got.value == doctest::Approx(expected).epsilon(1e-13));
      }
    }
  }
}

TEST_CASE("tail estimates are nonnegative and shrink with V") {
  for (const char* name : {"id_r", "sigma_r", "mu_squared"}) {
    auto f = make_function(name, 1.0);
    for (i64 p : {2, 13}) {
      double last = HUGE_VAL;
      for (int V : {1, 2, 4, 8, 16, 32}) {
        const auto res = local_factor_lcm(f, 3, p, V);
        CHECK(res.tail_estimate >= 0.0);
        CHECK(res.tail_estimate <= last);
        last = res.tail_estimate;
      }
    }
  }
}

TEST_CASE("tail estimate actually bounds the omitted mass") {
  // value at V=40 is converged to ~1e-12; the V-truncated value must sit
  // within tail_estimate of it.
  for (const char* name : {"id_r", "sigma_r", "phi_r"}) {
    auto f = make_function(name, 1.0);
    for (i64 p : {2, 3}) {
      const double full = local_factor_lcm(f, 2, p, 40).value;
      for (int V : {2, 4, 8}) {
        const auto part = local_factor_lcm(f, 2, p, V);
        CHECK(std::abs(part.value - full) <= part.tail_estimate + 1e-12);
      }
    }
  }
}

TEST_CASE("kernel domain errors") {
  auto idneg = make_function("id_r", -1.0);
  CHECK_THROWS_AS(local_factor_lcm(idneg, 2, 2, 5), DomainError);
  auto idm = make_function("id_r", -0.25);
  CHECK_THROWS_AS(local_factor_ratio(idm, 2, 2, 5), DomainError);
  auto id1 = make_function("id_r", 1.0);
  CHECK_THROWS_AS(local_factor_lcm(id1, 1, 2, 5), ConfigError);
  CHECK_THROWS_AS(local_factor_lcm(id1, 2, 2, 0), ConfigError);
}
