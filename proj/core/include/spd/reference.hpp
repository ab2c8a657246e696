#ifndef SPD_REFERENCE_HPP
#define SPD_REFERENCE_HPP

#include <span>
#include <vector>

#include "spd/baseline.hpp"
#include "spd/partition.hpp"
#include "spd/shrinkage.hpp"

namespace spd {

enum class PartitionDistance { kBinder, kVariationOfInformation };

double partition_distance(PartitionDistance d, const Partition& p, const Partition& q);

// Centered partition process: p(pi) propto p_b(pi) exp(-omega d(pi, mu)).
struct CppParams {
  Partition anchor;
  double shrinkage = 0.0;
  PartitionDistance distance = PartitionDistance::kVariationOfInformation;
  BaselineSpec baseline = EwensPitman{};

  void validate() const;
};

/// Exact normalization is only offered up to this many items.
inline constexpr std::size_t kCppExactCap = 10;

/// log p_b(p) - omega d(p, mu); the baseline is evaluated in natural order.
/// Needs no normalizer, so any n is accepted.
double cpp_log_unnormalized(const CppParams& params, const Partition& p);

/// log of the normalizing sum over all partitions.  CapacityError above
/// kCppExactCap.
double cpp_log_normalizer(const CppParams& params);

double cpp_log_pmf(const CppParams& params, const Partition& p);

// Location-scale partition, extended with an allocation permutation.
struct LspParams {
  Partition anchor;
  double shrinkage = 0.0;

  void validate() const;
};

/// Sequential LSP allocation state: realized-cluster counts broken down by
/// anchor cluster, plus the anchor clusters already visited.
class LspAllocator {
 public:
  explicit LspAllocator(const LspParams& params);

  const AllocationState& state() const { return state_; }
  /// Normalized log CAPF over the q+1 candidates; `out` is resized.
  void log_capf(int item, std::vector<double>& out) const;
  double allocate_scored(int item, int cluster);
  void allocate(int item, int cluster);

 private:
  const LspParams* params_;
  AllocationState state_;
  AnchorSums counts_;
  std::vector<int> anchor_counts_;
  int anchor_seen_ = 0;
  mutable std::vector<double> scratch_;
};

double lsp_capf(const LspParams& params, const LspAllocator& alloc, int item, int candidate);

double lsp_log_pmf_labels(const LspParams& params, std::span<const int> labels, const Permutation& perm);
double lsp_log_pmf(const LspParams& params, const Partition& p, const Permutation& perm);
/// Forward draw by sequential allocation along `perm`.
Partition lsp_sample(const LspParams& params, const Permutation& perm, Rng& rng);
double lsp_marginal_log_pmf(const LspParams& params, const Partition& p, const MarginalMode& mode);

}  // namespace spd

#endif  // SPD_REFERENCE_HPP
