#include "spd/baseline.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <nlohmann/json.hpp>

#include "spd/bell.hpp"
#include "spd/errors.hpp"

namespace spd {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// Exact integer ratios up to this n; log-domain differences beyond.
constexpr int kExactUniformRatioCap = 25;

double log_bell_ratio(int a_num, int b_num, int a_den, int b_den, int n) {
  if (n <= kExactUniformRatioCap) {
    const auto num = extended_bell(a_num, b_num).convert_to<long double>();
    const auto den = extended_bell(a_den, b_den).convert_to<long double>();
    return static_cast<double>(std::log(num / den));
  }
  return log_extended_bell(a_num, b_num) - log_extended_bell(a_den, b_den);
}

}  // namespace

void validate(const BaselineSpec& spec) {
  std::visit(overloaded{
                 [](const EwensPitman& s) {
                   if (!(s.delta >= 0.0 && s.delta < 1.0))
                     throw DomainError("Ewens-Pitman discount must lie in [0, 1)");
                   if (!(s.alpha > -s.delta)) throw DomainError("Ewens-Pitman needs alpha > -delta");
                   if (s.alpha == 0.0 && s.delta == 0.0)
                     throw DomainError("Ewens-Pitman with alpha = delta = 0 is degenerate");
                 },
                 [](const UniformPartition& s) {
                   if (s.n < 1) throw DomainError("uniform partition needs n >= 1");
                 },
                 [](const JensenLiu& s) {
                   if (!(s.alpha > 0.0)) throw DomainError("Jensen-Liu mass must be positive");
                 },
                 [](const FixedPartition& s) {
                   if (s.target.size() == 0) throw DomainError("fixed partition target is empty");
                 },
             },
             spec);
}

bool is_exchangeable(const BaselineSpec& spec) {
  return std::holds_alternative<EwensPitman>(spec) || std::holds_alternative<UniformPartition>(spec) ||
         std::holds_alternative<FixedPartition>(spec);
}

std::string describe(const BaselineSpec& spec) {
  std::ostringstream os;
  std::visit(overloaded{
                 [&](const EwensPitman& s) {
                   if (s.delta == 0.0)
                     os << "Ewens(" << s.alpha << ")";
                   else
                     os << "EwensPitman(" << s.alpha << ", " << s.delta << ")";
                 },
                 [&](const UniformPartition& s) { os << "Uniform(" << s.n << ")"; },
                 [&](const JensenLiu& s) { os << "JensenLiu(" << s.alpha << ")"; },
                 [&](const FixedPartition& s) { os << "Fixed(" << s.target.to_string() << ")"; },
             },
             spec);
  return os.str();
}

BaselineSpec baseline_from_json(const nlohmann::json& j, std::size_t n_items) {
  const std::string family = j.value("family", std::string("ewens_pitman"));
  BaselineSpec spec;
  if (family == "ewens_pitman" || family == "ewens" || family == "crp") {
    spec = EwensPitman{j.value("alpha", 1.0), j.value("delta", 0.0)};
  } else if (family == "uniform") {
    spec = UniformPartition{j.value("n", static_cast<int>(n_items))};
  } else if (family == "jensen_liu") {
    spec = JensenLiu{j.value("alpha", 1.0)};
  } else if (family == "fixed") {
    if (!j.contains("target")) throw DomainError("fixed baseline needs a 'target' partition");
    spec = FixedPartition{Partition::parse(j.at("target").get<std::string>())};
  } else {
    throw DomainError("unknown baseline family '" + family + "'");
  }
  validate(spec);
  return spec;
}

nlohmann::json baseline_to_json(const BaselineSpec& spec) {
  return std::visit(overloaded{
                        [](const EwensPitman& s) {
                          return nlohmann::json{{"family", "ewens_pitman"}, {"alpha", s.alpha}, {"delta", s.delta}};
                        },
                        [](const UniformPartition& s) { return nlohmann::json{{"family", "uniform"}, {"n", s.n}}; },
                        [](const JensenLiu& s) { return nlohmann::json{{"family", "jensen_liu"}, {"alpha", s.alpha}}; },
                        [](const FixedPartition& s) {
                          return nlohmann::json{{"family", "fixed"}, {"target", s.target.to_string()}};
                        },
                    },
                    spec);
}

void AllocationState::allocate(int item, int cluster) {
  if (cluster < 1 || cluster > num_clusters() + 1) throw DomainError("allocation to an invalid cluster");
  if (labels_[item] != 0) throw DomainError("item allocated twice");
  labels_[item] = cluster;
  if (cluster == num_clusters() + 1) sizes_.push_back(0);
  ++sizes_[cluster - 1];
  ++allocated_;
}

void baseline_log_capf(const BaselineSpec& spec, const AllocationState& state, int item, std::span<double> out) {
  const int q = state.num_clusters();
  if (static_cast<int>(out.size()) != q + 1) throw DomainError("CAPF output buffer has the wrong size");
  const int k = state.step();
  if (k == 1) {
    out[0] = 0.0;
    return;
  }
  const double prior_items = static_cast<double>(k - 1);
  std::visit(overloaded{
                 [&](const EwensPitman& s) {
                   const double log_denom = std::log(prior_items + s.alpha);
                   const auto sizes = state.cluster_sizes();
                   for (int c = 0; c < q; ++c) out[c] = std::log(sizes[c] - s.delta) - log_denom;
                   out[q] = std::log(s.alpha + s.delta * q) - log_denom;
                 },
                 [&](const UniformPartition& s) {
                   if (static_cast<std::size_t>(s.n) != state.size())
                     throw DomainError("uniform baseline n disagrees with the number of items");
                   const int remaining = s.n - k;
                   const double existing = log_bell_ratio(remaining, q, remaining + 1, q, s.n);
                   const double fresh = log_bell_ratio(remaining, q + 1, remaining + 1, q, s.n);
                   for (int c = 0; c < q; ++c) out[c] = existing;
                   out[q] = fresh;
                 },
                 [&](const JensenLiu& s) {
                   const double log_denom = std::log(q + s.alpha);
                   for (int c = 0; c < q; ++c) out[c] = -log_denom;
                   out[q] = std::log(s.alpha) - log_denom;
                 },
                 [&](const FixedPartition& s) {
                   if (s.target.size() != state.size())
                     throw DomainError("fixed baseline target has the wrong number of items");
                   std::fill(out.begin(), out.end(), kNegInf);
                   const int want = s.target[item];
                   for (std::size_t j = 0; j < state.size(); ++j) {
                     const int lj = state.label_of(static_cast<int>(j));
                     if (lj != 0 && s.target[j] == want) {
                       out[lj - 1] = 0.0;
                       return;
                     }
                   }
                   out[q] = 0.0;
                 },
             },
             spec);
}

double baseline_capf(const BaselineSpec& spec, const AllocationState& state, int item, int candidate) {
  const int q = state.num_clusters();
  if (candidate < 1 || candidate > q + 1) throw DomainError("candidate cluster outside 1..q+1");
  std::vector<double> w(q + 1);
  baseline_log_capf(spec, state, item, w);
  return std::exp(w[candidate - 1]);
}

double baseline_log_pmf(const BaselineSpec& spec, const Partition& p, const Permutation& perm) {
  const std::size_t n = p.size();
  if (perm.size() != n) throw DomainError("permutation and partition sizes differ");
  AllocationState state(n);
  detail::SlotMap slots(n);
  std::vector<double> w;
  w.reserve(n + 1);
  double total = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const int item = perm[k];
    const int q = state.num_clusters();
    const int c = slots.lookup(p[item], q + 1);
    w.assign(q + 1, 0.0);
    baseline_log_capf(spec, state, item, w);
    total += w[c - 1];
    if (total == kNegInf) return kNegInf;
    slots.bind(p[item], c);
    state.allocate(item, c);
  }
  return total;
}

double baseline_log_pmf(const BaselineSpec& spec, const Partition& p) {
  return baseline_log_pmf(spec, p, Permutation::identity(p.size()));
}

}  // namespace spd
