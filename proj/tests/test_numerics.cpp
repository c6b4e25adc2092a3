#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <limits>

#include "gittins/error.hpp"
#include "gittins/numerics.hpp"
#include "gittins/rewards.hpp"

using namespace gittins;

TEST_CASE("Gauss-Laguerre moments of Exp(1)") {
  const QuadratureRule rule = QuadratureRule::standard();
  CHECK(exp_weighted_integral(rule, [](double) { return 1.0; }) == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(exp_weighted_integral(rule, [](double z) { return z; }) == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(exp_weighted_integral(rule, [](double z) { return z * z; }) == doctest::Approx(2.0).epsilon(1e-13));
}

TEST_CASE("Gauss-Laguerre weights are positive and sum to one") {
  for (std::size_t n : {8, 16, 64, 128}) {
    const QuadratureRule rule = QuadratureRule::gauss_laguerre(n);
    REQUIRE(rule.size() == n);
    double sum = 0.0;
    for (double w : rule.weights()) {
      CHECK(w >= 0.0);
      sum += w;
    }
    CHECK(std::abs(sum - 1.0) < 1e-12);
  }
}

TEST_CASE("16-node rule is exact for degrees 0..9") {
  const QuadratureRule rule = QuadratureRule::gauss_laguerre(16);
  double factorial = 1.0;
  for (int k = 0; k <= 9; ++k) {
    if (k > 0) factorial *= k;
    const double v = exp_weighted_integral(rule, [k](double z) { return std::pow(z, k); });
    CHECK(std::abs(v - factorial) / factorial < 1e-12);
  }
}

TEST_CASE("adaptive rule agrees with Gauss-Laguerre on logistic integrands") {
  const RewardStructure rs = RewardStructure::logistic(1.0, 0.0, 1.0, 1.0);
  const QuadratureRule gl = QuadratureRule::standard();
  const QuadratureRule ad = QuadratureRule::adaptive_truncated(60.0, 1e-10);
  for (double x : {-5.0, -1.0, 0.0, 2.0, 6.0}) {
    auto f = [&](double z) { return rs(x + z / std::sqrt(2.0)); };
    CHECK(std::abs(exp_weighted_integral(gl, f) - exp_weighted_integral(ad, f)) < 1e-10);
  }
}

TEST_CASE("doubling z_max moves the result by less than the tail bound") {
  const RewardStructure rs = RewardStructure::logistic(1.0, 0.0, 1.0, 1.0);
  auto f = [&](double z) { return rs(-3.0 + z); };
  const QuadratureRule a = QuadratureRule::adaptive_truncated(15.0, 1e-12);
  const QuadratureRule b = QuadratureRule::adaptive_truncated(30.0, 1e-12);
  const double bound = a.tail_bound(rs.magnitude_bound());
  CHECK(bound == doctest::Approx(std::exp(-15.0)));
  CHECK(std::abs(exp_weighted_integral(a, f) - exp_weighted_integral(b, f)) < bound + 1e-12);
}

TEST_CASE("non-finite integrand is a numeric error") {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  try {
    exp_weighted_integral(QuadratureRule::standard(), [nan](double) { return nan; });
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Numeric);
  }
}

TEST_CASE("sign changes of simple functions") {
  const auto r1 = find_sign_changes([](double x) { return x; }, -1.0, 1.0, 100, 1e-8);
  REQUIRE(r1.size() == 1);
  CHECK(std::abs(r1[0]) <= 1e-8);
  CHECK(find_sign_changes([](double) { return 1.0; }, -1.0, 1.0, 100, 1e-8).empty());
  const auto r2 = find_sign_changes([](double x) { return (x - 0.3) * (x + 0.7); }, -1.0, 1.0,
                                    100, 1e-8);
  REQUIRE(r2.size() == 2);
  CHECK(std::abs(r2[0] + 0.7) <= 1e-8);
  CHECK(std::abs(r2[1] - 0.3) <= 1e-8);
}

TEST_CASE("roots are never reported where f is large") {
  auto f = [](double x) { return std::sin(3.0 * x) + 0.2 * x; };
  const double tol = 1e-9;
  for (double root : find_sign_changes(f, -6.0, 6.0, 500, tol)) {
    const double slope = std::abs(f(root + 1e-6) - f(root - 1e-6)) / 2e-6;
    CHECK(std::abs(f(root)) <= tol * (1.0 + slope));
  }
}

TEST_CASE("pairwise sum and linspace") {
  std::vector<double> v(1000, 0.1);
  CHECK(pairwise_sum(v) == doctest::Approx(100.0).epsilon(1e-14));
  const auto xs = linspace(-2.0, 2.0, 5);
  REQUIRE(xs.size() == 5);
  CHECK(xs.front() == -2.0);
  CHECK(xs.back() == 2.0);
  CHECK(xs[2] == 0.0);
  CHECK(format_real(0.1) == "0.10000000000000001");
}
