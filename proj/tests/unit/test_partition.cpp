#include "doctest.h"

#include <cmath>
#include <set>

#include "spd/errors.hpp"
#include "spd/partition.hpp"

using namespace spd;

TEST_CASE("canonicalize relabels by first appearance") {
  CHECK(Partition::parse("2,2,1").to_string() == "1,1,2");
  CHECK(Partition::parse("1,1,2,2").to_string() == "1,1,2,2");
  CHECK(Partition::parse("3,1,3,2").to_string() == "1,2,1,3");
  CHECK(Partition::parse("7,-4,7,100").to_string() == "1,2,1,3");
  CHECK_THROWS_AS(canonicalize(std::vector<int>{}), DomainError);
}

TEST_CASE("canonicalize is idempotent and relabeling invariant") {
  Rng rng(3);
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<int> raw(8);
    for (int& v : raw) v = static_cast<int>(uniform01(rng) * 5);
    const Partition p = canonicalize(raw);
    CHECK(canonicalize(p.labels()) == p);
    std::vector<int> shifted(raw);
    for (int& v : shifted) v = 37 - 3 * v;
    CHECK(canonicalize(shifted) == p);
  }
}

TEST_CASE("enumeration counts match the Bell numbers") {
  const int bell[] = {1, 1, 2, 5, 15, 52, 203, 877, 4140};
  for (std::size_t n = 1; n <= 8; ++n) {
    const auto all = enumerate_partitions(n);
    CHECK(all.size() == static_cast<std::size_t>(bell[n]));
    std::set<Partition> unique(all.begin(), all.end());
    CHECK(unique.size() == all.size());
    for (const auto& p : all) CHECK(canonicalize(p.labels()) == p);
  }
  CHECK(enumerate_partitions(1).front().to_string() == "1");
  CHECK_THROWS_AS(enumerate_partitions(kEnumerationCap + 1), CapacityError);
}

TEST_CASE("adjusted Rand index") {
  const auto a = Partition::parse("1,1,2,2");
  CHECK(adjusted_rand_index(a, a) == doctest::Approx(1.0));
  CHECK(adjusted_rand_index(Partition::parse("1,2,3,4"), Partition::parse("1,1,1,1")) == doctest::Approx(0.0));
  // 2x3 contingency table: index 1, expected 1/3, max 3/2.
  CHECK(adjusted_rand_index(a, Partition::parse("1,1,2,3")) == doctest::Approx(4.0 / 7.0).epsilon(1e-14));
  CHECK(adjusted_rand_index(Partition::parse("1,1,2,3"), a) == doctest::Approx(4.0 / 7.0).epsilon(1e-14));
  CHECK_THROWS_AS(adjusted_rand_index(a, Partition::parse("1,1")), DomainError);
}

TEST_CASE("Binder and VI distances") {
  const auto a = Partition::parse("1,1,2,2");
  CHECK(binder_distance(a, a) == 0.0);
  CHECK(binder_distance(a, Partition::parse("1,1,1,1")) == 4.0);
  CHECK(binder_distance(Partition::parse("1,2,3"), Partition::parse("1,1,1")) == 3.0);
  CHECK(vi_distance(a, a) == doctest::Approx(0.0));
  CHECK(vi_distance(a, Partition::parse("1,1,1,1")) == doctest::Approx(std::log(2.0)));
  CHECK(vi_distance(Partition::parse("1,2"), Partition::parse("1,1")) == doctest::Approx(std::log(2.0)));
  CHECK_THROWS_AS(binder_distance(a, Partition::parse("1")), DomainError);
  CHECK_THROWS_AS(vi_distance(a, Partition::parse("1")), DomainError);
}

TEST_CASE("distances are symmetric metrics on all partitions of 5") {
  const auto all = enumerate_partitions(5);
  for (const auto& p : all)
    for (const auto& q : all) {
      CHECK(binder_distance(p, q) == binder_distance(q, p));
      CHECK(vi_distance(p, q) == doctest::Approx(vi_distance(q, p)).epsilon(1e-12));
      CHECK(vi_distance(p, q) >= 0.0);
      CHECK(adjusted_rand_index(p, q) == doctest::Approx(adjusted_rand_index(q, p)));
      if (p == q) {
        CHECK(binder_distance(p, q) == 0.0);
        CHECK(vi_distance(p, q) == 0.0);
      } else {
        CHECK(binder_distance(p, q) > 0.0);
        CHECK(vi_distance(p, q) > 1e-12);
      }
    }
}

TEST_CASE("permutations") {
  const auto p = Permutation::parse("2,3,1");
  CHECK(p[0] == 1);
  CHECK(p.to_string() == "2,3,1");
  CHECK(p.positions() == std::vector<int>{2, 0, 1});
  CHECK_THROWS_AS(Permutation::parse("1,1,2"), DomainError);
  CHECK_THROWS_AS(Permutation(std::vector<int>{0, 3}), DomainError);
  int count = 0;
  for_each_permutation(4, [&](const Permutation&) { ++count; });
  CHECK(count == 24);
  Rng rng(11);
  for (int i = 0; i < 20; ++i) {
    const auto r = Permutation::random(6, rng);
    std::set<int> seen(r.order().begin(), r.order().end());
    CHECK(seen.size() == 6);
  }
}
