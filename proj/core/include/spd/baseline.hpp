#ifndef SPD_BASELINE_HPP
#define SPD_BASELINE_HPP

#include <span>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "spd/partition.hpp"

namespace spd {

/// Ewens-Pitman (two-parameter CRP).  delta = 0 gives the Ewens / CRP(alpha).
struct EwensPitman {
  double alpha = 1.0;
  double delta = 0.0;
};

/// Uniform distribution over the Bell(n) partitions of n items.
struct UniformPartition {
  int n = 0;
};

/// Jensen-Liu: uniform over existing clusters, mass alpha for a new one.
struct JensenLiu {
  double alpha = 1.0;
};

/// Point mass at `target`.
struct FixedPartition {
  Partition target;
};

using BaselineSpec = std::variant<EwensPitman, UniformPartition, JensenLiu, FixedPartition>;

/// Throws DomainError when parameters are outside their support
/// (delta in [0,1), alpha > -delta, Ewens alpha = delta = 0 rejected,
/// Jensen-Liu alpha > 0, uniform n >= 1).
void validate(const BaselineSpec& spec);

inline BaselineSpec ewens(double alpha) { return EwensPitman{alpha, 0.0}; }

bool is_exchangeable(const BaselineSpec& spec);
std::string describe(const BaselineSpec& spec);

/// {"family": "ewens_pitman"|"ewens"|"crp"|"uniform"|"jensen_liu"|"fixed", ...}
BaselineSpec baseline_from_json(const nlohmann::json& j, std::size_t n_items);
nlohmann::json baseline_to_json(const BaselineSpec& spec);

/// Partial allocation of n items.  Clusters are numbered 1..q in order of
/// creation; item labels are 0 until allocated.
class AllocationState {
 public:
  explicit AllocationState(std::size_t n) : labels_(n, 0) {}

  std::size_t size() const { return labels_.size(); }
  /// 1-based index of the next allocation (k in the CAPF formulas).
  int step() const { return allocated_ + 1; }
  int allocated() const { return allocated_; }
  int num_clusters() const { return static_cast<int>(sizes_.size()); }
  std::span<const int> cluster_sizes() const { return sizes_; }
  int label_of(int item) const { return labels_[item]; }

  /// `cluster` must be in 1..num_clusters()+1.
  void allocate(int item, int cluster);

 private:
  std::vector<int> labels_;
  std::vector<int> sizes_;
  int allocated_ = 0;
};

/// Log CAPF over the candidate set {1..q, q+1} for allocating `item` next.
/// `out` must have size num_clusters()+1.  At step 1 the single candidate has
/// log-probability 0.
void baseline_log_capf(const BaselineSpec& spec, const AllocationState& state, int item,
                       std::span<double> out);

/// Pr_b(item -> candidate | state).  Throws DomainError on an invalid
/// candidate or a uniform baseline whose n disagrees with the state.
double baseline_capf(const BaselineSpec& spec, const AllocationState& state, int item, int candidate);

/// Sum of log CAPFs along `perm`.  -inf (not an error) for a fixed-partition
/// baseline whose target differs from p.
double baseline_log_pmf(const BaselineSpec& spec, const Partition& p, const Permutation& perm);

/// Unordered log pmf for exchangeable specs (natural order otherwise).
double baseline_log_pmf(const BaselineSpec& spec, const Partition& p);

namespace detail {

/// Maps arbitrary positive labels of a label vector to allocation-order
/// cluster numbers while walking a permutation.
class SlotMap {
 public:
  explicit SlotMap(std::size_t max_label) : slot_(max_label + 2, 0) {}
  /// Cluster number for `label`, or next_new if it has not been seen.
  int lookup(int label, int next_new) const {
    const int s = slot_[label];
    return s ? s : next_new;
  }
  void bind(int label, int cluster) { slot_[label] = cluster; }

 private:
  std::vector<int> slot_;
};

}  // namespace detail

}  // namespace spd

#endif  // SPD_BASELINE_HPP
