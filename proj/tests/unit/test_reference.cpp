#include "doctest.h"

#include <cmath>
#include <map>

#include "spd/errors.hpp"
#include "spd/reference.hpp"

using namespace spd;

TEST_CASE("CPP with zero shrinkage is its baseline") {
  for (std::size_t n = 2; n <= 8; ++n) {
    std::vector<int> raw(n);
    for (std::size_t i = 0; i < n; ++i) raw[i] = static_cast<int>(i / 2) + 1;
    for (auto d : {PartitionDistance::kBinder, PartitionDistance::kVariationOfInformation}) {
      const CppParams params{Partition::from_labels(raw), 0.0, d, ewens(1.0)};
      if (n > 6) {
        const auto p = Partition::single_cluster(n);
        CHECK(cpp_log_pmf(params, p) == doctest::Approx(baseline_log_pmf(ewens(1.0), p)).epsilon(1e-12));
        continue;
      }
      for (const auto& p : enumerate_partitions(n))
        CHECK(cpp_log_pmf(params, p) == doctest::Approx(baseline_log_pmf(ewens(1.0), p)).epsilon(1e-12));
    }
  }
}

TEST_CASE("CPP concentration and normalization") {
  const CppParams strong{Partition::parse("1,1,2,2"), 50.0, PartitionDistance::kVariationOfInformation, ewens(1.0)};
  CHECK(std::exp(cpp_log_pmf(strong, strong.anchor)) > 0.99);

  const CppParams mid{Partition::parse("1,2,1,3,2"), 2.0, PartitionDistance::kBinder, UniformPartition{5}};
  std::vector<double> logs;
  for (const auto& p : enumerate_partitions(5)) logs.push_back(cpp_log_pmf(mid, p));
  CHECK(std::abs(std::exp(log_sum_exp(logs)) - 1.0) < 1e-10);

  // Direct check: p propto p_b exp(-omega d).
  const auto p = Partition::parse("1,1,1,2,2");
  double z = 0.0;
  for (const auto& q : enumerate_partitions(5))
    z += std::exp(baseline_log_pmf(UniformPartition{5}, q)) * std::exp(-2.0 * binder_distance(q, mid.anchor));
  const double want = std::exp(baseline_log_pmf(UniformPartition{5}, p)) * std::exp(-2.0 * binder_distance(p, mid.anchor)) / z;
  CHECK(std::exp(cpp_log_pmf(mid, p)) == doctest::Approx(want).epsilon(1e-12));

  CHECK_THROWS_AS(cpp_log_pmf(CppParams{Partition::single_cluster(11), 1.0}, Partition::single_cluster(11)), CapacityError);
  CHECK(std::isfinite(cpp_log_unnormalized(CppParams{Partition::single_cluster(30), 1.0}, Partition::singletons(30))));
  CHECK_THROWS_AS(CppParams(Partition::parse("1,2"), -1.0).validate(), DomainError);
}

TEST_CASE("LSP CAPF examples") {
  const LspParams two{Partition::parse("1,1"), 3.0};
  LspAllocator alloc(two);
  CHECK(lsp_capf(two, alloc, 0, 1) == 1.0);
  alloc.allocate(0, 1);
  // existing (1+3)/(1+1+3), new 1/(1+1+3)
  CHECK(lsp_capf(two, alloc, 1, 1) == doctest::Approx(0.8));
  CHECK(lsp_capf(two, alloc, 1, 2) == doctest::Approx(0.2));
  CHECK_THROWS_AS(lsp_capf(two, alloc, 1, 3), DomainError);

  // n=3, mu=(1,1,2), omega=1, natural order, p=(1,1,2):
  // step 2: 2/3; step 3: existing 1/4, new 2/3 -> 8/11.
  const LspParams three{Partition::parse("1,1,2"), 1.0};
  CHECK(std::exp(lsp_log_pmf(three, Partition::parse("1,1,2"), Permutation::identity(3))) ==
        doctest::Approx(16.0 / 33.0).epsilon(1e-14));
}

TEST_CASE("LSP with zero shrinkage is Jensen-Liu(1)") {
  const LspParams params{Partition::parse("1,2,2,1,3"), 0.0};
  Rng rng(3);
  for (int rep = 0; rep < 5; ++rep) {
    const auto perm = Permutation::random(5, rng);
    for (const auto& p : enumerate_partitions(5))
      CHECK(lsp_log_pmf(params, p, perm) == doctest::Approx(baseline_log_pmf(JensenLiu{1.0}, p, perm)).epsilon(1e-12));
  }
}

TEST_CASE("LSP normalization, concentration, permutation dependence") {
  const LspParams params{Partition::parse("1,2,2,1,3"), 2.5};
  const auto perm = Permutation::parse("4,2,5,1,3");
  std::vector<double> logs;
  for (const auto& p : enumerate_partitions(5)) logs.push_back(lsp_log_pmf(params, p, perm));
  CHECK(std::abs(std::exp(log_sum_exp(logs)) - 1.0) < 1e-10);

  const LspParams strong{Partition::parse("1,1,2,2"), 1e6};
  CHECK(std::exp(lsp_marginal_log_pmf(strong, strong.anchor, ExactMarginal{})) > 0.999);

  const LspParams three{Partition::parse("1,1,2"), 1.0};
  bool differs = false;
  for (const auto& p : enumerate_partitions(3)) {
    const double a = lsp_log_pmf(three, p, Permutation::identity(3));
    for_each_permutation(3, [&](const Permutation& s) {
      if (std::abs(lsp_log_pmf(three, p, s) - a) > 1e-9) differs = true;
    });
  }
  CHECK(differs);

  std::vector<double> marg;
  for (const auto& p : enumerate_partitions(4)) marg.push_back(lsp_marginal_log_pmf(LspParams{Partition::parse("1,2,2,1"), 1.0}, p, ExactMarginal{}));
  CHECK(std::abs(std::exp(log_sum_exp(marg)) - 1.0) < 1e-12);
}

TEST_CASE("anchor mass increases with shrinkage for CPP and LSP") {
  const auto mu = Partition::parse("1,1,2,2");
  double last_cpp = 0.0, last_lsp = 0.0;
  for (int i = 0; i < 10; ++i) {
    const double w = 0.5 * i;
    const double cpp = std::exp(cpp_log_pmf(CppParams{mu, w, PartitionDistance::kVariationOfInformation, ewens(1.0)}, mu));
    const double lsp = std::exp(lsp_marginal_log_pmf(LspParams{mu, w}, mu, ExactMarginal{}));
    if (i > 0) {
      CHECK(cpp > last_cpp);
      CHECK(lsp > last_lsp);
    }
    last_cpp = cpp;
    last_lsp = lsp;
  }
}

TEST_CASE("LSP forward draws match the permutation-marginal pmf") {
  const LspParams params{Partition::parse("1,1,2,3"), 1.5};
  Rng rng(17);
  std::map<std::string, double> freq;
  const int draws = 100000;
  for (int k = 0; k < draws; ++k) freq[lsp_sample(params, Permutation::random(4, rng), rng).to_string()] += 1.0 / draws;
  double tv = 0.0;
  for (const auto& p : enumerate_partitions(4))
    tv += std::abs(freq[p.to_string()] - std::exp(lsp_marginal_log_pmf(params, p, ExactMarginal{})));
  CHECK(0.5 * tv < 0.01);
}
