#ifndef SPD_ORACLE_HPP
#define SPD_ORACLE_HPP

#include <string>
#include <variant>
#include <vector>

#include "spd/bell.hpp"
#include "spd/shrinkage.hpp"

namespace spd {

struct PartitionMass {
  Partition partition;
  double log_probability = 0.0;
  double probability = 0.0;
};

struct FixedPermutation {
  Permutation perm;
};
struct PermutationMarginal {};
using OracleMode = std::variant<FixedPermutation, PermutationMarginal>;

inline constexpr std::size_t kOracleFixedCap = 8;
inline constexpr std::size_t kOracleMarginalCap = 6;

/// Full pmf table by enumeration, in restricted-growth order.
std::vector<PartitionMass> exact_distribution(const SpParams& params, const OracleMode& mode);

/// log of the total mass of every partition except `excluded`.  Stays
/// informative long after 1 - Pr(excluded) underflows in linear scale.
double log_mass_excluding(const std::vector<PartitionMass>& dist, const Partition& excluded);
double mass_of(const std::vector<PartitionMass>& dist, const Partition& p);

double total_variation(const std::vector<PartitionMass>& a, const std::vector<PartitionMass>& b);

struct TheoremReport {
  std::string id;
  std::string grid;
  bool pass = true;
  /// Smallest strict-inequality gap (positive when passing) or, for
  /// equalities, tolerance minus the largest deviation.
  double margin = 0.0;
  std::string diagnostics;
};

std::string format_report(const TheoremReport& r);

/// Shrinkage limits.  Each psi in `grits` is routed to the matching case:
/// (0,1) -> anchor, < 0 -> one cluster, > 1 -> singletons.  Part (a) checks
/// omega = 0 against the baseline.  Returns reports "1a".."1d".
struct LimitsCase {
  Partition anchor;
  BaselineSpec baseline;
  std::vector<double> grits;
  double omega_max = 1e3;
  double epsilon = 1e-3;
  /// Negative control: evaluate the anchor-consistency check at -psi.
  bool flip_anchor_grit = false;
};
std::vector<TheoremReport> verify_limits(const std::vector<LimitsCase>& cases);

/// Pr(pi = mu) strictly increasing over `omegas` (common
/// shrinkage, psi in (0,1)).  Strictness is judged on log(1 - Pr(mu)).
struct MonotonicityCase {
  Partition anchor;
  BaselineSpec baseline;
  double grit = 0.3;
  std::vector<double> omegas;
};
TheoremReport verify_monotonicity(const std::vector<MonotonicityCase>& cases);

/// KL(point mass at mu || SP) = -log Pr(mu) and TV = 1 - Pr(mu)
/// both strictly decreasing over the grid.
TheoremReport verify_divergences(const std::vector<MonotonicityCase>& cases);

/// Anchors agreeing on every pair of positive-shrinkage items
/// give identical pmfs for every partition and permutation.
struct ZeroShrinkageCase {
  Partition anchor;
  Partition other_anchor;
  std::vector<double> shrinkage;
  double grit = 0.3;
  BaselineSpec baseline;
};
bool anchors_agree_on_support(const Partition& a, const Partition& b, const std::vector<double>& shrinkage);
TheoremReport verify_zero_shrinkage(const std::vector<ZeroShrinkageCase>& cases, double tolerance = 1e-12);

/// Limiting partitions when some items have zero shrinkage.
struct LimitingCase {
  Partition anchor;
  std::vector<int> mask;  // 0/1 per item
  double grit = 0.3;
  BaselineSpec baseline;
  double omega_big = 1e4;
  double epsilon = 1e-8;
};

struct LimitingResult {
  std::vector<Partition> observed;   // mass > epsilon at omega_big
  std::vector<Partition> predicted;  // restriction to masked items equals the anchor's
  std::vector<double> observed_mass;
  int zero_items = 0;        // a
  int anchored_clusters = 0;  // b
  BigInt expected_count;      // B(a, b)
  bool sets_match = false;
  bool count_matches = false;
  double min_limiting_mass = 0.0;
  double max_vanishing_mass = 0.0;
};

LimitingResult limiting_partitions(const LimitingCase& c);

/// Every predicted partition retains mass > epsilon.
TheoremReport verify_limiting_partitions(const std::vector<LimitingCase>& cases);
/// The number of limiting partitions equals B(a, b).
TheoremReport verify_limiting_count(const std::vector<LimitingCase>& cases);

/// The grids used by the `verify` command (n <= 5).
struct TheoremSuite {
  std::vector<LimitsCase> limits;
  std::vector<MonotonicityCase> monotonicity;
  std::vector<ZeroShrinkageCase> zero_shrinkage;
  std::vector<LimitingCase> limiting;
};
TheoremSuite default_theorem_suite(std::uint64_t seed = 20240601);

/// Runs every report whose id starts with `filter` (empty = all).
std::vector<TheoremReport> run_theorem_suite(const TheoremSuite& suite, const std::string& filter = "");

}  // namespace spd

#endif  // SPD_ORACLE_HPP
