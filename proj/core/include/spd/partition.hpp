#ifndef SPD_PARTITION_HPP
#define SPD_PARTITION_HPP

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "spd/numeric.hpp"

namespace spd {

/// A set partition of {1,...,n} stored as canonical 1-based cluster labels:
/// the first item has label 1 and every later item has a label at most one
/// more than the largest label seen before it.
class Partition {
 public:
  Partition() = default;

  /// Canonicalizes arbitrary integer labels; equal labels mean co-clustered.
  /// Throws DomainError on empty input.
  static Partition from_labels(std::span<const int> raw_labels);

  /// Parses "1,1,2,2" (any integer labels; the result is canonicalized).
  static Partition parse(std::string_view text);

  static Partition single_cluster(std::size_t n);
  static Partition singletons(std::size_t n);

  std::size_t size() const { return labels_.size(); }
  int num_clusters() const { return num_clusters_; }
  int operator[](std::size_t item) const { return labels_[item]; }
  std::span<const int> labels() const { return labels_; }
  std::vector<int> cluster_sizes() const;

  std::string to_string() const;

  friend bool operator==(const Partition&, const Partition&) = default;
  friend auto operator<=>(const Partition&, const Partition&) = default;

 private:
  std::vector<int> labels_;
  int num_clusters_ = 0;
};

Partition canonicalize(std::span<const int> raw_labels);

/// Allocation order: order()[k] is the (0-based) index of the item allocated
/// at step k+1.  Serialized 1-based.
class Permutation {
 public:
  Permutation() = default;
  /// Throws DomainError unless `order` is a bijection on {0,...,n-1}.
  explicit Permutation(std::vector<int> order);

  static Permutation identity(std::size_t n);
  static Permutation random(std::size_t n, Rng& rng);
  /// Parses 1-based "2,1,3".
  static Permutation parse(std::string_view text);

  std::size_t size() const { return order_.size(); }
  int operator[](std::size_t k) const { return order_[k]; }
  std::span<const int> order() const { return order_; }
  /// position()[item] = step index (0-based) at which item is allocated.
  std::vector<int> positions() const;

  /// Swaps the contents of two steps.
  void swap_steps(std::size_t a, std::size_t b);
  std::vector<int>& mutable_order() { return order_; }

  std::string to_string() const;

  friend bool operator==(const Permutation&, const Permutation&) = default;

 private:
  std::vector<int> order_;
};

/// Set-partition enumeration is capped at this many items.
inline constexpr std::size_t kEnumerationCap = 12;

/// Calls `visit` for every canonical partition of n items in lexicographic
/// (restricted-growth) order.  Throws CapacityError for n > kEnumerationCap.
void for_each_partition(std::size_t n, const std::function<void(const Partition&)>& visit);

std::vector<Partition> enumerate_partitions(std::size_t n);

/// Calls `visit` for every permutation of n items in lexicographic order.
void for_each_permutation(std::size_t n, const std::function<void(const Permutation&)>& visit);

double adjusted_rand_index(const Partition& p, const Partition& q);

/// Number of unordered pairs on whose co-clustering p and q disagree.
double binder_distance(const Partition& p, const Partition& q);

/// Variation of information, natural log.
double vi_distance(const Partition& p, const Partition& q);

}  // namespace spd

#endif  // SPD_PARTITION_HPP
