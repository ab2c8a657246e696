#include "spd/reference.hpp"

#include <cmath>

#include "spd/errors.hpp"

namespace spd {

double partition_distance(PartitionDistance d, const Partition& p, const Partition& q) {
  return d == PartitionDistance::kBinder ? binder_distance(p, q) : vi_distance(p, q);
}

void CppParams::validate() const {
  if (anchor.size() == 0) throw DomainError("anchor partition is empty");
  if (!(shrinkage >= 0.0) || !std::isfinite(shrinkage)) throw DomainError("CPP shrinkage must be finite and >= 0");
  spd::validate(baseline);
}

double cpp_log_unnormalized(const CppParams& params, const Partition& p) {
  if (p.size() != params.anchor.size()) throw DomainError("partition and anchor sizes differ");
  const double lb = baseline_log_pmf(params.baseline, p);
  if (lb == kNegInf || params.shrinkage == 0.0) return lb;
  return lb - params.shrinkage * partition_distance(params.distance, p, params.anchor);
}

double cpp_log_normalizer(const CppParams& params) {
  const std::size_t n = params.anchor.size();
  if (n > kCppExactCap)
    throw CapacityError("CPP normalization by enumeration capped at n = " + std::to_string(kCppExactCap));
  std::vector<double> terms;
  for_each_partition(n, [&](const Partition& p) { terms.push_back(cpp_log_unnormalized(params, p)); });
  return log_sum_exp(terms);
}

double cpp_log_pmf(const CppParams& params, const Partition& p) {
  if (p.size() != params.anchor.size()) throw DomainError("partition and anchor sizes differ");
  const double z = cpp_log_normalizer(params);
  return cpp_log_unnormalized(params, p) - z;
}

void LspParams::validate() const {
  if (anchor.size() == 0) throw DomainError("anchor partition is empty");
  if (!(shrinkage >= 0.0) || !std::isfinite(shrinkage)) throw DomainError("LSP shrinkage must be finite and >= 0");
}

LspAllocator::LspAllocator(const LspParams& params)
    : params_(&params),
      state_(params.anchor.size()),
      counts_(params.anchor.num_clusters()),
      anchor_counts_(params.anchor.num_clusters(), 0) {}

void LspAllocator::log_capf(int item, std::vector<double>& out) const {
  const int q = state_.num_clusters();
  out.resize(q + 1);
  if (state_.step() == 1) {
    out[0] = 0.0;
    return;
  }
  const double omega = params_->shrinkage;
  const int m = params_->anchor[item];
  const double visited = static_cast<double>(anchor_seen_);
  for (int c = 1; c <= q; ++c) {
    const double num = 1.0 + omega * counts_.agreement(c, m);
    const double den = 1.0 + visited + omega * counts_.total(c);
    out[c - 1] = std::log(num) - std::log(den);
  }
  const double fresh_anchor = anchor_counts_[m - 1] == 0 ? 1.0 : 0.0;
  out[q] = std::log(1.0 + omega * fresh_anchor) - std::log(1.0 + visited + omega);
  const double lse = log_sum_exp(out);
  for (double& v : out) v -= lse;
}

double LspAllocator::allocate_scored(int item, int cluster) {
  double lp = 0.0;
  if (state_.step() > 1) {
    log_capf(item, scratch_);
    lp = scratch_[cluster - 1];
  }
  allocate(item, cluster);
  return lp;
}

void LspAllocator::allocate(int item, int cluster) {
  state_.allocate(item, cluster);
  const int m = params_->anchor[item];
  counts_.add(cluster, m, 1.0);
  if (anchor_counts_[m - 1]++ == 0) ++anchor_seen_;
}

double lsp_capf(const LspParams& params, const LspAllocator& alloc, int item, int candidate) {
  (void)params;
  const int q = alloc.state().num_clusters();
  if (candidate < 1 || candidate > q + 1) throw DomainError("candidate cluster outside 1..q+1");
  std::vector<double> w;
  alloc.log_capf(item, w);
  return std::exp(w[candidate - 1]);
}

double lsp_log_pmf_labels(const LspParams& params, std::span<const int> labels, const Permutation& perm) {
  const std::size_t n = params.anchor.size();
  if (labels.size() != n || perm.size() != n) throw DomainError("partition, permutation, and anchor sizes differ");
  int max_label = 0;
  for (int l : labels) max_label = std::max(max_label, l);
  LspAllocator alloc(params);
  detail::SlotMap slots(static_cast<std::size_t>(max_label));
  double total = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const int item = perm[k];
    const int c = slots.lookup(labels[item], alloc.state().num_clusters() + 1);
    total += alloc.allocate_scored(item, c);
    slots.bind(labels[item], c);
  }
  return total;
}

double lsp_log_pmf(const LspParams& params, const Partition& p, const Permutation& perm) {
  return lsp_log_pmf_labels(params, p.labels(), perm);
}

Partition lsp_sample(const LspParams& params, const Permutation& perm, Rng& rng) {
  const std::size_t n = params.anchor.size();
  if (perm.size() != n) throw DomainError("permutation and anchor sizes differ");
  LspAllocator alloc(params);
  std::vector<double> w;
  for (std::size_t k = 0; k < n; ++k) {
    const int item = perm[k];
    int c = 1;
    if (k > 0) {
      alloc.log_capf(item, w);
      c = static_cast<int>(sample_log_weights(w, rng)) + 1;
    }
    alloc.allocate(item, c);
  }
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = alloc.state().label_of(static_cast<int>(i));
  return Partition::from_labels(labels);
}

double lsp_marginal_log_pmf(const LspParams& params, const Partition& p, const MarginalMode& mode) {
  const std::size_t n = params.anchor.size();
  if (p.size() != n) throw DomainError("partition and anchor sizes differ");
  std::vector<double> logs;
  if (std::holds_alternative<ExactMarginal>(mode)) {
    if (n > kExactMarginalCap)
      throw CapacityError("exact permutation marginal capped at n = " + std::to_string(kExactMarginalCap));
    for_each_permutation(n, [&](const Permutation& perm) { logs.push_back(lsp_log_pmf(params, p, perm)); });
  } else {
    const auto& mc = std::get<MonteCarloMarginal>(mode);
    if (mc.draws == 0) throw DomainError("Monte Carlo marginal needs at least one draw");
    for (std::size_t j = 0; j < mc.draws; ++j) {
      Rng rng(split_seed(mc.seed, j));
      logs.push_back(lsp_log_pmf(params, p, Permutation::random(n, rng)));
    }
  }
  return log_sum_exp(logs) - std::log(static_cast<double>(logs.size()));
}

}  // namespace spd
