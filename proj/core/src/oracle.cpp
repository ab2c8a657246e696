#include "spd/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>

#include "spd/errors.hpp"

namespace spd {

namespace {

std::vector<Permutation> all_permutations(std::size_t n) {
  std::vector<Permutation> out;
  for_each_permutation(n, [&](const Permutation& p) { out.push_back(p); });
  return out;
}

template <typename LogPmf>
std::vector<PartitionMass> tabulate(std::size_t n, const OracleMode& mode, LogPmf log_pmf) {
  std::vector<PartitionMass> dist;
  if (const auto* fixed = std::get_if<FixedPermutation>(&mode)) {
    if (n > kOracleFixedCap) throw CapacityError("fixed-permutation oracle capped at n = " + std::to_string(kOracleFixedCap));
    for_each_partition(n, [&](const Partition& p) {
      const double lp = log_pmf(p, fixed->perm);
      dist.push_back({p, lp, std::exp(lp)});
    });
    return dist;
  }
  if (n > kOracleMarginalCap)
    throw CapacityError("permutation-marginal oracle capped at n = " + std::to_string(kOracleMarginalCap));
  const auto perms = all_permutations(n);
  const double log_count = std::log(static_cast<double>(perms.size()));
  std::vector<double> logs(perms.size());
  for_each_partition(n, [&](const Partition& p) {
    for (std::size_t j = 0; j < perms.size(); ++j) logs[j] = log_pmf(p, perms[j]);
    const double lp = log_sum_exp(logs) - log_count;
    dist.push_back({p, lp, std::exp(lp)});
  });
  return dist;
}

std::vector<PartitionMass> baseline_distribution(const BaselineSpec& spec, std::size_t n, const OracleMode& mode) {
  return tabulate(n, mode, [&](const Partition& p, const Permutation& perm) { return baseline_log_pmf(spec, p, perm); });
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(6) << v;
  return os.str();
}

std::string case_label(const Partition& anchor, const BaselineSpec& baseline) {
  return "mu=(" + anchor.to_string() + ") " + describe(baseline);
}

// log(-log(1 - x)) given log x, without cancellation for tiny x.
double log_kl_from_log_complement(double log_x) {
  if (log_x == kNegInf) return kNegInf;
  if (log_x < -575.0) return log_x;
  const double x = std::exp(log_x);
  return std::log(-std::log1p(-x));
}

void fold_margin(TheoremReport& r, double gap, bool first) {
  r.margin = first ? gap : std::min(r.margin, gap);
  if (!(gap > 0.0)) r.pass = false;
}

std::vector<double> log_nonanchor_along(const MonotonicityCase& c, std::vector<double>& anchor_mass) {
  std::vector<double> out;
  anchor_mass.clear();
  for (double w : c.omegas) {
    const auto params = SpParams::common(c.anchor, w, c.grit, c.baseline);
    const auto dist = exact_distribution(params, PermutationMarginal{});
    out.push_back(log_mass_excluding(dist, c.anchor));
    anchor_mass.push_back(mass_of(dist, c.anchor));
  }
  return out;
}

}  // namespace

std::vector<PartitionMass> exact_distribution(const SpParams& params, const OracleMode& mode) {
  params.validate();
  return tabulate(params.size(), mode,
                  [&](const Partition& p, const Permutation& perm) { return sp_log_pmf(params, p, perm); });
}

double log_mass_excluding(const std::vector<PartitionMass>& dist, const Partition& excluded) {
  std::vector<double> logs;
  logs.reserve(dist.size());
  for (const auto& e : dist)
    if (!(e.partition == excluded)) logs.push_back(e.log_probability);
  return log_sum_exp(logs);
}

double mass_of(const std::vector<PartitionMass>& dist, const Partition& p) {
  for (const auto& e : dist)
    if (e.partition == p) return e.probability;
  return 0.0;
}

double total_variation(const std::vector<PartitionMass>& a, const std::vector<PartitionMass>& b) {
  std::map<Partition, double> diff;
  for (const auto& e : a) diff[e.partition] += e.probability;
  for (const auto& e : b) diff[e.partition] -= e.probability;
  double tv = 0.0;
  for (const auto& [p, d] : diff) tv += std::abs(d);
  return 0.5 * tv;
}

std::string format_report(const TheoremReport& r) {
  std::ostringstream os;
  os << "theorem " << r.id << ": " << (r.pass ? "PASS" : "FAIL") << "  margin=" << std::setprecision(6) << r.margin
     << "\n  grid: " << r.grid << "\n";
  std::istringstream lines(r.diagnostics);
  for (std::string line; std::getline(lines, line);) os << "  " << line << "\n";
  return os.str();
}

std::vector<TheoremReport> verify_limits(const std::vector<LimitsCase>& cases) {
  TheoremReport a{"1a", "omega=0, every partition, permutation-marginal", true, 0.0, ""};
  TheoremReport b{"1b", "", true, 0.0, ""};
  TheoremReport c{"1c", "", true, 0.0, ""};
  TheoremReport d{"1d", "", true, 0.0, ""};
  bool first_a = true, first_b = true, first_c = true, first_d = true;
  std::ostringstream grid_b, grid_c, grid_d;
  constexpr double kEqualityTol = 1e-12;

  for (const auto& lc : cases) {
    const std::size_t n = lc.anchor.size();
    const std::string label = case_label(lc.anchor, lc.baseline);

    // (a) diffusion to the baseline.
    const auto base = baseline_distribution(lc.baseline, n, PermutationMarginal{});
    const auto sp0 = exact_distribution(SpParams::common(lc.anchor, 0.0, 0.3, lc.baseline), PermutationMarginal{});
    double worst = 0.0;
    for (std::size_t i = 0; i < base.size(); ++i)
      worst = std::max(worst, std::abs(base[i].probability - sp0[i].probability));
    fold_margin(a, kEqualityTol - worst, first_a);
    first_a = false;
    a.diagnostics += label + ": max |p_sp - p_b| = " + fmt(worst) + "\n";

    for (double psi : lc.grits) {
      const Partition* target = nullptr;
      const Partition rho1 = Partition::single_cluster(n);
      const Partition rhon = Partition::singletons(n);
      TheoremReport* r = nullptr;
      bool* first = nullptr;
      double eval_psi = psi;
      if (psi > 0.0 && psi < 1.0) {
        target = &lc.anchor;
        r = &b;
        first = &first_b;
        if (lc.flip_anchor_grit) eval_psi = -psi;
        grid_b << psi << " ";
      } else if (psi < 0.0) {
        target = &rho1;
        r = &c;
        first = &first_c;
        grid_c << psi << " ";
      } else if (psi > 1.0) {
        target = &rhon;
        r = &d;
        first = &first_d;
        grid_d << psi << " ";
      } else {
        continue;  // psi in {0, 1}: no limit claimed
      }
      const auto dist =
          exact_distribution(SpParams::common(lc.anchor, lc.omega_max, eval_psi, lc.baseline), PermutationMarginal{});
      const double mass = mass_of(dist, *target);
      const double gap = mass - (1.0 - lc.epsilon);
      fold_margin(*r, gap, *first);
      *first = false;
      r->diagnostics += label + " psi=" + fmt(eval_psi) + " omega=" + fmt(lc.omega_max) + ": Pr(" +
                        target->to_string() + ")=" + fmt(mass) + " log(1-Pr)=" +
                        fmt(log_mass_excluding(dist, *target)) + (gap > 0.0 ? "" : "  <-- FAIL") + "\n";
    }
  }
  b.grid = "psi in (0,1): " + grid_b.str() + "| target anchor, 1-eps bound";
  c.grid = "psi < 0: " + grid_c.str() + "| target single cluster";
  d.grid = "psi > 1: " + grid_d.str() + "| target all singletons";
  return {a, b, c, d};
}

TheoremReport verify_monotonicity(const std::vector<MonotonicityCase>& cases) {
  TheoremReport r{"2", "", true, 0.0, ""};
  bool first = true;
  for (const auto& c : cases) {
    const std::string label = case_label(c.anchor, c.baseline) + " psi=" + fmt(c.grit);
    r.grid += "[" + label + ", " + std::to_string(c.omegas.size()) + " omegas " + fmt(c.omegas.front()) + ".." +
              fmt(c.omegas.back()) + "] ";
    const auto base = baseline_distribution(c.baseline, c.anchor.size(), PermutationMarginal{});
    const double pb = mass_of(base, c.anchor);
    if (!(pb > 0.0 && pb < 1.0)) {
      r.pass = false;
      r.diagnostics += label + ": precondition 0 < p_b(mu) < 1 violated\n";
      continue;
    }
    std::vector<double> mass;
    const auto lna = log_nonanchor_along(c, mass);
    if (c.omegas.front() == 0.0) {
      const double dev = std::abs(mass.front() - pb);
      fold_margin(r, 1e-12 - dev, first);
      first = false;
      r.diagnostics += label + ": Pr(mu | omega=0)=" + fmt(mass.front()) + " vs p_b(mu)=" + fmt(pb) + "\n";
    }
    double min_gap = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < lna.size(); ++i) {
      const double gap = lna[i - 1] - lna[i];
      min_gap = std::min(min_gap, gap);
      if (!(gap > 0.0))
        r.diagnostics += label + ": not increasing between omega=" + fmt(c.omegas[i - 1]) + " and " +
                         fmt(c.omegas[i]) + "  <-- FAIL\n";
    }
    fold_margin(r, min_gap, first);
    first = false;
    r.diagnostics += label + ": Pr(mu) " + fmt(mass.front()) + " -> " + fmt(mass.back()) +
                     ", min decrease of log(1-Pr(mu)) = " + fmt(min_gap) + "\n";
  }
  return r;
}

TheoremReport verify_divergences(const std::vector<MonotonicityCase>& cases) {
  TheoremReport r{"3", "", true, 0.0, ""};
  bool first = true;
  for (const auto& c : cases) {
    const std::string label = case_label(c.anchor, c.baseline) + " psi=" + fmt(c.grit);
    r.grid += "[" + label + ", omegas " + fmt(c.omegas.front()) + ".." + fmt(c.omegas.back()) + "] ";
    std::vector<double> mass;
    const auto log_tv = log_nonanchor_along(c, mass);
    std::vector<double> log_kl(log_tv.size());
    std::transform(log_tv.begin(), log_tv.end(), log_kl.begin(), log_kl_from_log_complement);
    for (std::size_t i = 0; i < mass.size(); ++i) {
      const double tv = std::exp(log_tv[i]);
      if (tv < 0.0 || tv > 1.0) {
        r.pass = false;
        r.diagnostics += label + ": TV outside [0,1] at omega=" + fmt(c.omegas[i]) + "  <-- FAIL\n";
      }
    }
    if (c.omegas.front() == 0.0) {
      const auto base = baseline_distribution(c.baseline, c.anchor.size(), PermutationMarginal{});
      const double kl0 = -std::log(mass_of(base, c.anchor));
      const double dev = std::abs(std::exp(log_kl.front()) - kl0);
      fold_margin(r, 1e-12 - dev, first);
      first = false;
      r.diagnostics += label + ": KL(omega=0)=" + fmt(std::exp(log_kl.front())) + " vs -log p_b(mu)=" + fmt(kl0) + "\n";
    }
    double min_kl = std::numeric_limits<double>::infinity(), min_tv = min_kl;
    for (std::size_t i = 1; i < log_tv.size(); ++i) {
      min_kl = std::min(min_kl, log_kl[i - 1] - log_kl[i]);
      min_tv = std::min(min_tv, log_tv[i - 1] - log_tv[i]);
      if (!(log_kl[i - 1] > log_kl[i]) || !(log_tv[i - 1] > log_tv[i]))
        r.diagnostics += label + ": divergence not decreasing at omega=" + fmt(c.omegas[i]) + "  <-- FAIL\n";
    }
    fold_margin(r, min_kl, first);
    first = false;
    fold_margin(r, min_tv, false);
    r.diagnostics += label + ": KL " + fmt(std::exp(log_kl.front())) + " -> exp(" + fmt(log_kl.back()) + "), TV " +
                     fmt(std::exp(log_tv.front())) + " -> exp(" + fmt(log_tv.back()) +
                     "), min log-decrease KL=" + fmt(min_kl) + " TV=" + fmt(min_tv) + "\n";
  }
  return r;
}

bool anchors_agree_on_support(const Partition& a, const Partition& b, const std::vector<double>& shrinkage) {
  if (a.size() != b.size() || shrinkage.size() != a.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (shrinkage[i] <= 0.0) continue;
    for (std::size_t j = i + 1; j < a.size(); ++j) {
      if (shrinkage[j] <= 0.0) continue;
      if ((a[i] == a[j]) != (b[i] == b[j])) return false;
    }
  }
  return true;
}

TheoremReport verify_zero_shrinkage(const std::vector<ZeroShrinkageCase>& cases, double tolerance) {
  TheoremReport r{"4", std::to_string(cases.size()) + " anchor pairs, every partition x permutation", true, 0.0, ""};
  bool first = true;
  for (const auto& c : cases) {
    std::string w;
    for (double v : c.shrinkage) w += fmt(v) + " ";
    const std::string label =
        "mu=(" + c.anchor.to_string() + ") mu*=(" + c.other_anchor.to_string() + ") omega=(" + w + ") psi=" + fmt(c.grit);
    if (!anchors_agree_on_support(c.anchor, c.other_anchor, c.shrinkage)) {
      r.pass = false;
      r.diagnostics += label + ": anchors disagree on positive-shrinkage pairs (invalid case)\n";
      continue;
    }
    SpParams p1{c.anchor, c.shrinkage, c.grit, c.baseline};
    SpParams p2{c.other_anchor, c.shrinkage, c.grit, c.baseline};
    p1.validate();
    p2.validate();
    const auto perms = all_permutations(c.anchor.size());
    double worst = 0.0;
    for_each_partition(c.anchor.size(), [&](const Partition& p) {
      for (const auto& perm : perms)
        worst = std::max(worst, std::abs(std::exp(sp_log_pmf(p1, p, perm)) - std::exp(sp_log_pmf(p2, p, perm))));
    });
    fold_margin(r, tolerance - worst, first);
    first = false;
    r.diagnostics += label + ": max |diff| = " + fmt(worst) + (worst <= tolerance ? "" : "  <-- FAIL") + "\n";
  }
  return r;
}

LimitingResult limiting_partitions(const LimitingCase& c) {
  const std::size_t n = c.anchor.size();
  if (c.mask.size() != n) throw DomainError("shrinkage mask length differs from anchor size");
  LimitingResult res;
  std::vector<double> shrinkage(n);
  std::vector<char> anchored(c.anchor.num_clusters() + 1, 0);
  for (std::size_t i = 0; i < n; ++i) {
    if (c.mask[i] != 0 && c.mask[i] != 1) throw DomainError("shrinkage mask entries must be 0 or 1");
    shrinkage[i] = c.omega_big * c.mask[i];
    if (c.mask[i] == 0)
      ++res.zero_items;
    else
      anchored[c.anchor[i]] = 1;
  }
  res.anchored_clusters = static_cast<int>(std::count(anchored.begin(), anchored.end(), 1));
  res.expected_count = extended_bell(res.zero_items, res.anchored_clusters);

  const SpParams params{c.anchor, shrinkage, c.grit, c.baseline};
  const auto dist = exact_distribution(params, PermutationMarginal{});
  res.min_limiting_mass = std::numeric_limits<double>::infinity();
  for (const auto& e : dist) {
    bool agrees = true;
    for (std::size_t i = 0; i < n && agrees; ++i) {
      if (!c.mask[i]) continue;
      for (std::size_t j = i + 1; j < n; ++j)
        if (c.mask[j] && ((e.partition[i] == e.partition[j]) != (c.anchor[i] == c.anchor[j]))) {
          agrees = false;
          break;
        }
    }
    if (agrees && baseline_log_pmf(c.baseline, e.partition) > kNegInf) {
      res.predicted.push_back(e.partition);
      res.min_limiting_mass = std::min(res.min_limiting_mass, e.probability);
    } else {
      res.max_vanishing_mass = std::max(res.max_vanishing_mass, e.probability);
    }
    if (e.probability > c.epsilon) {
      res.observed.push_back(e.partition);
      res.observed_mass.push_back(e.probability);
    }
  }
  res.sets_match = res.observed == res.predicted;
  res.count_matches = BigInt(res.observed.size()) == res.expected_count;
  return res;
}

namespace {

std::string limiting_label(const LimitingCase& c) {
  std::string s;
  for (int m : c.mask) s += std::to_string(m);
  return "mu=(" + c.anchor.to_string() + ") s=" + s + " psi=" + fmt(c.grit) + " " + describe(c.baseline);
}

}  // namespace

TheoremReport verify_limiting_partitions(const std::vector<LimitingCase>& cases) {
  TheoremReport r{"5", "", true, 0.0, ""};
  bool first = true;
  for (const auto& c : cases) {
    const auto res = limiting_partitions(c);
    r.grid = "omega_big=" + fmt(c.omega_big) + " eps=" + fmt(c.epsilon) + ", " + std::to_string(cases.size()) + " instances";
    fold_margin(r, res.min_limiting_mass - c.epsilon, first);
    first = false;
    std::string listed;
    for (const auto& p : res.predicted) listed += "(" + p.to_string() + ") ";
    r.diagnostics += limiting_label(c) + ": predicted " + listed + "min mass " + fmt(res.min_limiting_mass) +
                     (res.min_limiting_mass > c.epsilon ? "" : "  <-- FAIL") + "\n";
  }
  return r;
}

TheoremReport verify_limiting_count(const std::vector<LimitingCase>& cases) {
  TheoremReport r{"6", "", true, 0.0, ""};
  bool first = true;
  for (const auto& c : cases) {
    const auto res = limiting_partitions(c);
    r.grid = "omega_big=" + fmt(c.omega_big) + " eps=" + fmt(c.epsilon) + ", " + std::to_string(cases.size()) + " instances";
    const bool ok = res.sets_match && res.count_matches;
    if (!ok) r.pass = false;
    fold_margin(r, c.epsilon - res.max_vanishing_mass, first);
    first = false;
    r.diagnostics += limiting_label(c) + ": " + std::to_string(res.observed.size()) + " limiting partitions, B(" +
                     std::to_string(res.zero_items) + "," + std::to_string(res.anchored_clusters) +
                     ")=" + res.expected_count.str() + ", largest vanishing mass " + fmt(res.max_vanishing_mass) +
                     (ok ? "" : "  <-- FAIL") + "\n";
  }
  return r;
}

namespace {

int uniform_int(Rng& rng, int lo, int hi) {
  return lo + static_cast<int>(uniform01(rng) * static_cast<double>(hi - lo + 1));
}

Partition random_partition(std::size_t n, Rng& rng) {
  // Random restricted-growth string.
  std::vector<int> labels(n, 1);
  int max_label = 1;
  for (std::size_t i = 1; i < n; ++i) {
    labels[i] = uniform_int(rng, 1, max_label + 1);
    max_label = std::max(max_label, labels[i]);
  }
  return Partition::from_labels(labels);
}

}  // namespace

TheoremSuite default_theorem_suite(std::uint64_t seed) {
  TheoremSuite s;
  const std::vector<double> grits{-2.0, -1.0, -0.035, 0.1, 0.3, 0.5, 0.9, 1.1, 2.0, 5.0};
  s.limits = {
      {Partition::parse("1,1,2,2"), ewens(1.0), grits},
      {Partition::parse("1,1,2,2,3"), ewens(1.0), grits},
      {Partition::parse("1,2,2,3"), UniformPartition{4}, grits},
      {Partition::parse("1,2,1,3,2"), EwensPitman{1.0, 0.5}, grits},
      {Partition::parse("1,1,2,2"), JensenLiu{1.0}, grits},
  };

  std::vector<double> omegas;
  for (int i = 0; i <= 20; ++i) omegas.push_back(0.5 * i);
  s.monotonicity = {
      {Partition::parse("1,1,2,2"), ewens(1.0), 0.3, omegas},
      {Partition::parse("1,2,1,3,2"), ewens(1.0), 0.7, omegas},
      {Partition::parse("1,1,2,2"), UniformPartition{4}, 0.5, omegas},
      {Partition::parse("1,1,1,2,2"), EwensPitman{1.0, 0.25}, 0.3, omegas},
  };

  Rng rng(seed);
  for (double w : {0.5, 2.0, 10.0})
    for (double psi : {0.3, -0.5, 1.5})
      s.zero_shrinkage.push_back(
          {Partition::parse("1,2,2,3"), Partition::parse("1,2,2,2"), {w, w, w, 0.0}, psi, ewens(1.0)});
  s.zero_shrinkage.push_back(
      {Partition::parse("1,1,2,2"), Partition::parse("1,2,3,4"), {0.0, 0.0, 0.0, 0.0}, 0.3, ewens(1.0)});
  for (int rep = 0; rep < 5; ++rep) {
    const std::size_t n = 5;
    const Partition anchor = random_partition(n, rng);
    std::vector<double> w(n);
    std::vector<int> other(anchor.labels().begin(), anchor.labels().end());
    const int zero_item = uniform_int(rng, 0, static_cast<int>(n) - 1);
    for (std::size_t i = 0; i < n; ++i) {
      const bool zero = static_cast<int>(i) == zero_item || uniform01(rng) < 0.25;
      w[i] = zero ? 0.0 : 0.5 + 3.0 * uniform01(rng);
      if (zero) other[i] = uniform_int(rng, 1, static_cast<int>(n) + 1);
    }
    s.zero_shrinkage.push_back({anchor, Partition::from_labels(other), w, 0.2 + 0.6 * uniform01(rng), ewens(1.0)});
  }

  s.limiting = {
      {Partition::parse("1,1,2,2"), {1, 1, 1, 0}, 0.3, ewens(1.0)},
      {Partition::parse("1,1,2,3"), {1, 1, 1, 0}, 0.3, ewens(1.0)},
      {Partition::parse("1,1,2,2"), {1, 1, 1, 1}, 0.3, ewens(1.0)},
      {Partition::parse("1,1,2,2,3"), {1, 1, 0, 0, 1}, 0.3, ewens(1.0)},
      {Partition::parse("1,2,2,1,3"), {0, 1, 1, 0, 1}, 0.6, UniformPartition{5}},
  };
  return s;
}

std::vector<TheoremReport> run_theorem_suite(const TheoremSuite& suite, const std::string& filter) {
  auto wanted = [&](const std::string& id) { return filter.empty() || id.rfind(filter, 0) == 0; };
  std::vector<TheoremReport> out;
  if (filter.empty() || filter[0] == '1') {
    for (auto& r : verify_limits(suite.limits))
      if (wanted(r.id)) out.push_back(std::move(r));
  }
  if (wanted("2")) out.push_back(verify_monotonicity(suite.monotonicity));
  if (wanted("3")) out.push_back(verify_divergences(suite.monotonicity));
  if (wanted("4")) out.push_back(verify_zero_shrinkage(suite.zero_shrinkage));
  if (wanted("5")) out.push_back(verify_limiting_partitions(suite.limiting));
  if (wanted("6")) out.push_back(verify_limiting_count(suite.limiting));
  return out;
}

}  // namespace spd
