#include "doctest.h"

#include <cmath>
#include <nlohmann/json.hpp>

#include "spd/baseline.hpp"
#include "spd/errors.hpp"

using namespace spd;

namespace {

AllocationState state_of(std::initializer_list<int> labels, std::size_t n) {
  AllocationState s(n);
  int item = 0;
  for (int l : labels) s.allocate(item++, l);
  return s;
}

// Ewens(alpha) EPPF: alpha^q prod (n_c - 1)! / rising(alpha, n).
double ewens_pmf(const Partition& p, double alpha) {
  double lp = p.num_clusters() * std::log(alpha);
  for (int s : p.cluster_sizes()) lp += std::lgamma(static_cast<double>(s));
  lp -= std::lgamma(alpha + static_cast<double>(p.size())) - std::lgamma(alpha);
  return std::exp(lp);
}

std::vector<BaselineSpec> specs_for(std::size_t n) {
  return {ewens(1.0), ewens(0.4), EwensPitman{1.0, 0.5}, EwensPitman{-0.2, 0.3}, UniformPartition{static_cast<int>(n)},
          JensenLiu{1.0}, JensenLiu{2.5}};
}

}  // namespace

TEST_CASE("CAPF worked examples") {
  auto s = state_of({1, 1}, 3);
  CHECK(baseline_capf(ewens(1.0), s, 2, 1) == doctest::Approx(2.0 / 3.0));
  CHECK(baseline_capf(ewens(1.0), s, 2, 2) == doctest::Approx(1.0 / 3.0));

  s = state_of({1}, 3);
  CHECK(baseline_capf(EwensPitman{1.0, 0.5}, s, 1, 1) == doctest::Approx(0.25));
  CHECK(baseline_capf(EwensPitman{1.0, 0.5}, s, 1, 2) == doctest::Approx(0.75));

  CHECK(baseline_capf(UniformPartition{3}, s, 1, 1) == doctest::Approx(2.0 / 5.0));
  CHECK(baseline_capf(UniformPartition{3}, s, 1, 2) == doctest::Approx(3.0 / 5.0));

  s = state_of({1, 1}, 3);
  CHECK(baseline_capf(JensenLiu{1.0}, s, 2, 1) == doctest::Approx(0.5));
  CHECK(baseline_capf(JensenLiu{1.0}, s, 2, 2) == doctest::Approx(0.5));

  AllocationState fresh(3);
  for (const auto& spec : specs_for(3)) CHECK(baseline_capf(spec, fresh, 0, 1) == 1.0);
}

TEST_CASE("CAPF validation") {
  auto s = state_of({1, 2}, 3);
  CHECK_THROWS_AS(baseline_capf(ewens(1.0), s, 2, 4), DomainError);
  CHECK_THROWS_AS(baseline_capf(ewens(1.0), s, 2, 0), DomainError);
  CHECK_THROWS_AS(baseline_capf(UniformPartition{2}, s, 2, 1), DomainError);
  CHECK_THROWS_AS(validate(EwensPitman{0.0, 0.0}), DomainError);
  CHECK_THROWS_AS(validate(EwensPitman{1.0, 1.0}), DomainError);
  CHECK_THROWS_AS(validate(EwensPitman{-0.5, 0.2}), DomainError);
  CHECK_THROWS_AS(validate(JensenLiu{0.0}), DomainError);
}

TEST_CASE("CAPFs sum to one in every reachable state") {
  for (std::size_t n = 2; n <= 6; ++n) {
    for (const auto& spec : specs_for(n)) {
      for (const auto& p : enumerate_partitions(n)) {
        AllocationState s(n);
        for (std::size_t k = 0; k < n; ++k) {
          double total = 0.0;
          for (int c = 1; c <= s.num_clusters() + 1; ++c) total += baseline_capf(spec, s, static_cast<int>(k), c);
          CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
          s.allocate(static_cast<int>(k), p[k]);
        }
      }
    }
  }
}

TEST_CASE("pmf examples") {
  for (const auto& p : enumerate_partitions(3))
    CHECK(baseline_log_pmf(UniformPartition{3}, p) == doctest::Approx(std::log(1.0 / 5.0)));
  CHECK(baseline_log_pmf(ewens(1.0), Partition::parse("1,1")) == doctest::Approx(std::log(0.5)));
  CHECK(baseline_log_pmf(FixedPartition{Partition::parse("1,2")}, Partition::parse("1,2")) == 0.0);
  CHECK(baseline_log_pmf(FixedPartition{Partition::parse("1,2")}, Partition::parse("1,1")) == kNegInf);
}

TEST_CASE("Ewens pmf matches the closed-form EPPF") {
  for (double alpha : {0.3, 1.0, 4.0})
    for (const auto& p : enumerate_partitions(6))
      CHECK(std::exp(baseline_log_pmf(ewens(alpha), p)) == doctest::Approx(ewens_pmf(p, alpha)).epsilon(1e-12));
}

TEST_CASE("uniform baseline is uniform") {
  const double bell[] = {1, 1, 2, 5, 15, 52, 203, 877, 4140};
  for (std::size_t n = 1; n <= 8; ++n)
    for (const auto& p : enumerate_partitions(n))
      CHECK(std::exp(baseline_log_pmf(UniformPartition{static_cast<int>(n)}, p)) ==
            doctest::Approx(1.0 / bell[n]).epsilon(1e-12));
  // Log-domain ratios beyond the exact cutoff still normalize.
  const std::size_t n = 40;
  AllocationState s(n);
  std::vector<double> w;
  for (std::size_t k = 0; k + 1 < n; ++k) s.allocate(static_cast<int>(k), k % 3 == 0 ? s.num_clusters() + 1 : 1);
  w.resize(s.num_clusters() + 1);
  baseline_log_capf(UniformPartition{static_cast<int>(n)}, s, static_cast<int>(n - 1), w);
  CHECK(std::exp(log_sum_exp(w)) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("exchangeable baselines are permutation invariant; Jensen-Liu is not") {
  Rng rng(5);
  const auto p = Partition::parse("1,2,1,3,2,1");
  for (const auto& spec : {ewens(1.3), BaselineSpec{EwensPitman{0.5, 0.4}}, BaselineSpec{UniformPartition{6}}}) {
    const double ref = baseline_log_pmf(spec, p, Permutation::identity(6));
    for (int i = 0; i < 20; ++i)
      CHECK(baseline_log_pmf(spec, p, Permutation::random(6, rng)) == doctest::Approx(ref).epsilon(1e-12));
  }
  bool differs = false;
  for (const auto& q : enumerate_partitions(3)) {
    double first = 0;
    bool init = false;
    for_each_permutation(3, [&](const Permutation& perm) {
      const double v = baseline_log_pmf(JensenLiu{1.0}, q, perm);
      if (!init) {
        first = v;
        init = true;
      } else if (std::abs(v - first) > 1e-9) {
        differs = true;
      }
    });
  }
  CHECK(differs);
}

TEST_CASE("baseline pmfs normalize for every fixed permutation") {
  Rng rng(9);
  for (std::size_t n = 1; n <= 7; ++n) {
    auto specs = specs_for(n);
    std::vector<int> target(n);
    for (std::size_t i = 0; i < n; ++i) target[i] = static_cast<int>(i % 2) + 1;
    specs.push_back(FixedPartition{Partition::from_labels(target)});
    for (const auto& spec : specs) {
      const auto perm = Permutation::random(n, rng);
      std::vector<double> logs;
      for_each_partition(n, [&](const Partition& p) { logs.push_back(baseline_log_pmf(spec, p, perm)); });
      CHECK(std::exp(log_sum_exp(logs)) == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("baseline json round trip") {
  const auto j = nlohmann::json::parse(R"({"family": "ewens_pitman", "alpha": 2.0, "delta": 0.25})");
  const auto spec = baseline_from_json(j, 4);
  CHECK(std::get<EwensPitman>(spec).delta == 0.25);
  CHECK(baseline_to_json(spec)["alpha"] == 2.0);
  CHECK(std::holds_alternative<UniformPartition>(baseline_from_json(nlohmann::json{{"family", "uniform"}}, 7)));
  CHECK(std::get<UniformPartition>(baseline_from_json(nlohmann::json{{"family", "uniform"}}, 7)).n == 7);
  CHECK(std::get<FixedPartition>(baseline_from_json(nlohmann::json{{"family", "fixed"}, {"target", "2,2,1"}}, 3))
            .target.to_string() == "1,1,2");
  CHECK_THROWS_AS(baseline_from_json(nlohmann::json{{"family", "epa"}}, 3), DomainError);
}
