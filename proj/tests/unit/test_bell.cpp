#include "doctest.h"

#include <cmath>
#include <functional>

#include "spd/bell.hpp"
#include "spd/errors.hpp"

using namespace spd;

namespace {

// Counts label assignments of `a` items when `b` clusters already exist.
long long brute_force(int a, int b) {
  std::function<long long(int, int)> rec = [&](int left, int clusters) -> long long {
    if (left == 0) return 1;
    long long total = 0;
    for (int c = 1; c <= clusters + 1; ++c) total += rec(left - 1, c == clusters + 1 ? clusters + 1 : clusters);
    return total;
  };
  return rec(a, b);
}

BigInt binomial(int n, int k) {
  BigInt r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

}  // namespace

TEST_CASE("extended Bell values") {
  CHECK(extended_bell(0, 7) == 1);
  CHECK(extended_bell(1, 3) == 4);
  CHECK(extended_bell(4, 0) == 15);
  CHECK(extended_bell(2, 1) == 5);
  const int bell[] = {1, 1, 2, 5, 15, 52, 203, 877, 4140};
  for (int a = 0; a <= 8; ++a) CHECK(extended_bell(a, 0) == bell[a]);
  for (int b = 0; b <= 20; ++b) CHECK(extended_bell(1, b) == b + 1);
  CHECK(extended_bell(25, 0) == BigInt("4638590332229999353"));
}

TEST_CASE("recurrence and binomial-sum identities") {
  for (int a = 0; a <= 10; ++a)
    for (int b = 0; b <= 10; ++b) {
      CHECK(extended_bell(a + 1, b) == b * extended_bell(a, b) + extended_bell(a, b + 1));
      BigInt sum = 0;
      for (int i = 0; i <= a; ++i) sum += binomial(a, i) * extended_bell(i, b);
      CHECK(extended_bell(a, b + 1) == sum);
    }
}

TEST_CASE("extended Bell counts canonical completions") {
  for (int a = 0; a <= 6; ++a)
    for (int b = 0; b <= 4; ++b) CHECK(extended_bell(a, b) == brute_force(a, b));
}

TEST_CASE("log extended Bell") {
  CHECK(log_extended_bell(0, 5) == 0.0);
  CHECK(log_extended_bell(4, 0) == doctest::Approx(std::log(15.0)).epsilon(1e-15));
  CHECK(log_extended_bell(2, 1) == doctest::Approx(std::log(5.0)).epsilon(1e-15));
  for (int a = 0; a <= 30; ++a)
    for (int b = 0; a + b <= 30; ++b) {
      const double exact = log_of(extended_bell(a, b));
      const double got = log_extended_bell(a, b);
      CHECK(std::abs(got - exact) <= 1e-12 * std::max(1.0, std::abs(exact)));
    }
  // Beyond the exact table the log recurrence takes over and stays finite.
  const double big = log_extended_bell(kExactBellCap + 10, 3);
  CHECK(std::isfinite(big));
  CHECK(big > log_extended_bell(kExactBellCap, 3));
}

TEST_CASE("capacity") {
  CHECK_THROWS_AS(extended_bell(kExactBellCap, 1), CapacityError);
  CHECK_THROWS_AS(log_extended_bell(kLogBellCap, 1), CapacityError);
  CHECK_THROWS_AS(extended_bell(-1, 0), DomainError);
}
