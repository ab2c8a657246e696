#include "spd/shrinkage.hpp"

#include <algorithm>
#include <cmath>

#include "spd/errors.hpp"

namespace spd {

SpParams SpParams::common(Partition anchor, double omega, double grit, BaselineSpec baseline) {
  SpParams p;
  p.shrinkage.assign(anchor.size(), omega);
  p.anchor = std::move(anchor);
  p.grit = grit;
  p.baseline = std::move(baseline);
  return p;
}

void SpParams::validate() const {
  if (anchor.size() == 0) throw DomainError("anchor partition is empty");
  if (shrinkage.size() != anchor.size()) throw DomainError("shrinkage length differs from anchor size");
  for (double w : shrinkage)
    if (!(w >= 0.0) || !std::isfinite(w)) throw DomainError("shrinkage must be finite and nonnegative");
  if (!std::isfinite(grit)) throw DomainError("grit must be finite");
  spd::validate(baseline);
}

void AnchorSums::add(int cluster, int anchor_label, double weight) {
  if (cluster == num_clusters() + 1) {
    total_.push_back(0.0);
    agreement_.resize(agreement_.size() + anchor_clusters_, 0.0);
  }
  agreement_[static_cast<std::size_t>(cluster - 1) * anchor_clusters_ + (anchor_label - 1)] += weight;
  total_[cluster - 1] += weight;
}

double anchor_log_factor(const SpParams& params, const AnchorSums& sums, int k, int item, int candidate) {
  if (k < 2) throw DomainError("the anchor factor is undefined for the first allocation");
  if (candidate < 1 || candidate > sums.num_clusters() + 1) throw DomainError("candidate cluster outside 1..q+1");
  const double w = params.shrinkage[item];
  if (candidate == sums.num_clusters() + 1 || w == 0.0) return 0.0;
  const double s = sums.agreement(candidate, params.anchor[item]);
  const double t = sums.total(candidate);
  const double km1 = static_cast<double>(k - 1);
  return w / (km1 * km1) * (s * s - params.grit * t * t);
}

void sp_log_capf(const SpParams& params, const AnchorSums& sums, const AllocationState& state, int item,
                 std::span<double> out) {
  baseline_log_capf(params.baseline, state, item, out);
  const int k = state.step();
  if (k == 1) return;
  for (int c = 1; c <= static_cast<int>(out.size()); ++c)
    if (out[c - 1] != kNegInf) out[c - 1] += anchor_log_factor(params, sums, k, item, c);
  const double lse = log_sum_exp(out);
  for (double& v : out) v -= lse;
}

double sp_capf(const SpParams& params, const AnchorSums& sums, const AllocationState& state, int item,
               int candidate) {
  const int q = state.num_clusters();
  if (candidate < 1 || candidate > q + 1) throw DomainError("candidate cluster outside 1..q+1");
  std::vector<double> w(q + 1);
  sp_log_capf(params, sums, state, item, w);
  return std::exp(w[candidate - 1]);
}

SpAllocator::SpAllocator(const SpParams& params)
    : params_(&params), state_(params.size()), sums_(params.anchor.num_clusters()) {}

void SpAllocator::log_capf(int item, std::vector<double>& out) const {
  out.resize(state_.num_clusters() + 1);
  sp_log_capf(*params_, sums_, state_, item, out);
}

double SpAllocator::allocate_scored(int item, int cluster) {
  double lp = 0.0;
  if (state_.step() > 1) {
    log_capf(item, scratch_);
    lp = scratch_[cluster - 1];
  }
  allocate(item, cluster);
  return lp;
}

void SpAllocator::allocate(int item, int cluster) {
  state_.allocate(item, cluster);
  sums_.add(cluster, params_->anchor[item], params_->shrinkage[item]);
}

double sp_log_pmf_labels(const SpParams& params, std::span<const int> labels, const Permutation& perm) {
  const std::size_t n = params.size();
  if (labels.size() != n || perm.size() != n) throw DomainError("partition, permutation, and anchor sizes differ");
  int max_label = 0;
  for (int l : labels) {
    if (l < 1) throw DomainError("labels must be positive");
    max_label = std::max(max_label, l);
  }
  SpAllocator alloc(params);
  detail::SlotMap slots(static_cast<std::size_t>(max_label));
  double total = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const int item = perm[k];
    const int c = slots.lookup(labels[item], alloc.state().num_clusters() + 1);
    total += alloc.allocate_scored(item, c);
    if (total == kNegInf) return kNegInf;
    slots.bind(labels[item], c);
  }
  return total;
}

double sp_log_pmf(const SpParams& params, const Partition& p, const Permutation& perm) {
  return sp_log_pmf_labels(params, p.labels(), perm);
}

MarginalEstimate sp_marginal_estimate(const SpParams& params, const Partition& p, const MarginalMode& mode) {
  const std::size_t n = params.size();
  if (p.size() != n) throw DomainError("partition and anchor sizes differ");
  std::vector<double> logs;
  if (std::holds_alternative<ExactMarginal>(mode)) {
    if (n > kExactMarginalCap)
      throw CapacityError("exact permutation marginal capped at n = " + std::to_string(kExactMarginalCap));
    for_each_permutation(n, [&](const Permutation& perm) { logs.push_back(sp_log_pmf(params, p, perm)); });
    return {log_sum_exp(logs) - std::log(static_cast<double>(logs.size())), 0.0};
  }
  const auto& mc = std::get<MonteCarloMarginal>(mode);
  if (mc.draws == 0) throw DomainError("Monte Carlo marginal needs at least one draw");
  logs.reserve(mc.draws);
  for (std::size_t j = 0; j < mc.draws; ++j) {
    Rng rng(split_seed(mc.seed, j));
    logs.push_back(sp_log_pmf(params, p, Permutation::random(n, rng)));
  }
  const double m = static_cast<double>(mc.draws);
  const double log_mean = log_sum_exp(logs) - std::log(m);
  const double mean = std::exp(log_mean);
  double ss = 0.0;
  for (double l : logs) {
    const double d = std::exp(l) - mean;
    ss += d * d;
  }
  const double se = mc.draws > 1 ? std::sqrt(ss / (m - 1.0) / m) : 0.0;
  return {log_mean, se};
}

double sp_marginal_log_pmf(const SpParams& params, const Partition& p, const MarginalMode& mode) {
  return sp_marginal_estimate(params, p, mode).log_pmf;
}

Partition sp_sample(const SpParams& params, const Permutation& perm, Rng& rng) {
  const std::size_t n = params.size();
  if (perm.size() != n) throw DomainError("permutation and anchor sizes differ");
  SpAllocator alloc(params);
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

}  // namespace spd
