#ifndef SPD_SHRINKAGE_HPP
#define SPD_SHRINKAGE_HPP

#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "spd/baseline.hpp"
#include "spd/partition.hpp"

namespace spd {

/// Parameters of the shrinkage partition distribution: an anchor partition,
/// per-item shrinkage weights, the grit, and the baseline whose CAPF is tilted
/// toward the anchor.
struct SpParams {
  Partition anchor;
  std::vector<double> shrinkage;
  double grit = 0.0;
  BaselineSpec baseline = EwensPitman{};

  /// Common shrinkage: every item gets `omega`.
  static SpParams common(Partition anchor, double omega, double grit, BaselineSpec baseline);

  std::size_t size() const { return anchor.size(); }

  /// Throws DomainError for negative or non-finite shrinkage, a length
  /// mismatch, non-finite grit, or an invalid baseline.
  void validate() const;
};

/// Running weighted co-allocation sums for the anchor factor.  For realized
/// cluster c and anchor cluster m:
///   agreement(c, m) = sum_j w_j I{pi_j = c} I{mu_j = m}
///   total(c)        = sum_j w_j I{pi_j = c}
/// over the items allocated so far.
class AnchorSums {
 public:
  explicit AnchorSums(int anchor_clusters) : anchor_clusters_(anchor_clusters) {}

  int num_clusters() const { return static_cast<int>(total_.size()); }
  double agreement(int cluster, int anchor_label) const {
    return agreement_[static_cast<std::size_t>(cluster - 1) * anchor_clusters_ + (anchor_label - 1)];
  }
  double total(int cluster) const { return total_[cluster - 1]; }

  /// `cluster` may be num_clusters()+1, which opens a new row.
  void add(int cluster, int anchor_label, double weight);

 private:
  int anchor_clusters_;
  std::vector<double> agreement_;
  std::vector<double> total_;
};

/// Log of the unnormalized anchor factor for allocating `item` at step k to
/// `candidate`:  w_item / (k-1)^2 * (S^2 - grit * T^2).  Zero for a new
/// cluster.  Throws DomainError for k < 2.
double anchor_log_factor(const SpParams& params, const AnchorSums& sums, int k, int item, int candidate);

/// Normalized log CAPF over the q+1 candidates (log domain, max-subtracted).
void sp_log_capf(const SpParams& params, const AnchorSums& sums, const AllocationState& state, int item,
                 std::span<double> out);

double sp_capf(const SpParams& params, const AnchorSums& sums, const AllocationState& state, int item,
               int candidate);

/// Sequential SP allocation: tracks the allocation state and anchor sums.
class SpAllocator {
 public:
  explicit SpAllocator(const SpParams& params);

  const AllocationState& state() const { return state_; }
  const AnchorSums& sums() const { return sums_; }

  /// Normalized log CAPF for the next item; `out` is resized to q+1.
  void log_capf(int item, std::vector<double>& out) const;
  /// Log CAPF of the given choice, then records the allocation.
  double allocate_scored(int item, int cluster);
  void allocate(int item, int cluster);

 private:
  const SpParams* params_;
  AllocationState state_;
  AnchorSums sums_;
  mutable std::vector<double> scratch_;
};

/// log p_sp(labels | params, perm).  `labels` may be any positive labels
/// (not necessarily canonical); equal labels mean co-clustered.
double sp_log_pmf_labels(const SpParams& params, std::span<const int> labels, const Permutation& perm);

double sp_log_pmf(const SpParams& params, const Partition& p, const Permutation& perm);

struct ExactMarginal {};
struct MonteCarloMarginal {
  std::size_t draws = 10000;
  std::uint64_t seed = 1;
};
using MarginalMode = std::variant<ExactMarginal, MonteCarloMarginal>;

/// Largest n for which exact permutation marginalization is allowed.
inline constexpr std::size_t kExactMarginalCap = 8;

struct MarginalEstimate {
  double log_pmf = 0.0;
  /// Standard error of the probability estimate (0 in exact mode).
  double std_error = 0.0;
};

/// log of the pmf averaged over a uniform prior on permutations.
double sp_marginal_log_pmf(const SpParams& params, const Partition& p, const MarginalMode& mode);
MarginalEstimate sp_marginal_estimate(const SpParams& params, const Partition& p, const MarginalMode& mode);

/// Forward draw by sequential allocation along `perm`.
Partition sp_sample(const SpParams& params, const Permutation& perm, Rng& rng);

}  // namespace spd

#endif  // SPD_SHRINKAGE_HPP
