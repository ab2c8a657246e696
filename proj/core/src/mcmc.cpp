#include "spd/mcmc.hpp"

#include <algorithm>
#include <cmath>
#include <ctime>
#include <future>
#include <numeric>

#include "spd/errors.hpp"

namespace spd {

std::string to_string(DependenceKind k) {
  switch (k) {
    case DependenceKind::kIndependent: return "independent";
    case DependenceKind::kHierarchical: return "hierarchical";
    case DependenceKind::kTemporal: return "temporal";
  }
  return "?";
}

std::string to_string(PriorFamily f) {
  switch (f) {
    case PriorFamily::kSp: return "sp";
    case PriorFamily::kCpp: return "cpp";
    case PriorFamily::kLsp: return "lsp";
    case PriorFamily::kFixed: return "fixed";
    case PriorFamily::kBaseline: return "baseline";
  }
  return "?";
}

namespace {

void check_uniform_size(const BaselineSpec& spec, int n) {
  if (const auto* u = std::get_if<UniformPartition>(&spec); u && u->n != n)
    throw DomainError("uniform baseline size differs from the number of units");
}

int uniform_index(Rng& rng, int n) { return std::min(n - 1, static_cast<int>(uniform01(rng) * n)); }

double thread_cpu_seconds() {
  timespec ts{};
  clock_gettime(CLOCK_THREAD_CPUTIME_ID, &ts);
  return static_cast<double>(ts.tv_sec) + 1e-9 * static_cast<double>(ts.tv_nsec);
}

// Labels currently in use (ascending) after removing `item`, plus the label
// a new cluster would take.
struct Candidates {
  std::vector<int> labels;
  int fresh = 0;
};

Candidates candidates_without(std::span<const int> labels, int item) {
  const int n = static_cast<int>(labels.size());
  std::vector<int> count(static_cast<std::size_t>(n) + 2, 0);
  for (int j = 0; j < n; ++j)
    if (j != item) ++count[labels[j]];
  Candidates c;
  for (int l = 1; l <= n + 1; ++l) {
    if (count[l] > 0)
      c.labels.push_back(l);
    else if (c.fresh == 0 && (l == labels[item] || count[labels[item]] > 0))
      c.fresh = l;
  }
  if (count[labels[item]] == 0) c.fresh = labels[item];
  return c;
}

}  // namespace

void ModelSpec::validate(int n_units, int n_times) const {
  const bool anchored = kind == DependenceKind::kIndependent && family != PriorFamily::kBaseline;
  if (anchored && static_cast<int>(anchor.size()) != n_units)
    throw DomainError("anchor partition size differs from the number of units");
  if (!spacing.empty()) {
    if (static_cast<int>(spacing.size()) != n_times - 1)
      throw DomainError("temporal spacing needs one entry per consecutive pair of time points");
    for (double d : spacing)
      if (!(d > 0.0) || !std::isfinite(d)) throw DomainError("temporal spacings must be positive");
  }
  if (!shrinkage_weights.empty()) {
    if (static_cast<int>(shrinkage_weights.size()) != n_units)
      throw DomainError("shrinkage weights need one entry per unit");
    for (double w : shrinkage_weights)
      if (!(w >= 0.0) || !std::isfinite(w)) throw DomainError("shrinkage weights must be nonnegative");
  }
  if (!(omega >= 0.0) || !std::isfinite(omega)) throw DomainError("shrinkage must be nonnegative");
  if (sample_omega && !(omega > 0.0)) throw DomainError("a sampled shrinkage needs a positive starting value");
  if (!std::isfinite(grit)) throw DomainError("grit must be finite");
  if (sample_grit && !(grit > 0.0 && grit < 1.0)) throw DomainError("a sampled grit must start inside (0, 1)");
  spd::validate(baseline);
  check_uniform_size(baseline, n_units);
  if (kind == DependenceKind::kHierarchical) {
    spd::validate(anchor_prior);
    check_uniform_size(anchor_prior, n_units);
  }
  if (kind == DependenceKind::kTemporal) {
    spd::validate(initial);
    check_uniform_size(initial, n_units);
  }
}

bool ModelSpec::has_sp_terms() const {
  if (kind == DependenceKind::kIndependent) return family == PriorFamily::kSp;
  return true;
}

McmcConfig McmcConfig::defaults_for(DependenceKind kind) {
  McmcConfig c;
  if (kind != DependenceKind::kIndependent) {
    c.perm_attempts = 200;
    c.perm_block = 5;
  }
  return c;
}

void McmcConfig::validate() const {
  if (iterations < 1) throw DomainError("iterations must be positive");
  if (burn_in < 0 || burn_in >= iterations) throw DomainError("burn-in must be in [0, iterations)");
  if (thin < 1) throw DomainError("thinning must be at least 1");
  if (perm_attempts < 0 || perm_block < 1) throw DomainError("permutation proposal settings are invalid");
  if (!(omega_shape > 0.0) || !(omega_rate > 0.0)) throw DomainError("shrinkage prior must have positive parameters");
  if (!(grit_a > 0.0) || !(grit_b > 0.0)) throw DomainError("grit prior must have positive shapes");
  if (!(omega_step > 0.0) || !(grit_step > 0.0)) throw DomainError("random-walk steps must be positive");
  if (chains < 1) throw DomainError("need at least one chain");
}

void AcceptanceStats::add(const AcceptanceStats& o) {
  perm_proposed += o.perm_proposed;
  perm_accepted += o.perm_accepted;
  omega_proposed += o.omega_proposed;
  omega_accepted += o.omega_accepted;
  grit_proposed += o.grit_proposed;
  grit_accepted += o.grit_accepted;
  anchor_proposed += o.anchor_proposed;
  anchor_accepted += o.anchor_accepted;
}

Sampler::Sampler(const RegressionDataset& data, ModelSpec model, McmcConfig config, RegressionPriors priors,
                 std::uint64_t seed)
    : data_(&data), model_(std::move(model)), config_(config), priors_(std::move(priors)), rng_(seed) {
  model_.validate(data.units(), data.times());
  config_.validate();
  priors_.validate(data.px(), data.pz());
  initialize();
}

std::vector<double> Sampler::shrinkage_at(int t, double omega) const {
  const std::size_t n = static_cast<std::size_t>(data_->units());
  double scale = omega;
  if (model_.kind == DependenceKind::kTemporal && t > 0 && !model_.spacing.empty()) scale /= model_.spacing[t - 1];
  std::vector<double> w(n, scale);
  if (!model_.shrinkage_weights.empty())
    for (std::size_t i = 0; i < n; ++i) w[i] *= model_.shrinkage_weights[i];
  return w;
}

const Partition* Sampler::anchor_for(int t) const {
  switch (model_.kind) {
    case DependenceKind::kIndependent: return &model_.anchor;
    case DependenceKind::kHierarchical: return &state_.anchor;
    case DependenceKind::kTemporal: return t > 0 ? &state_.partitions[t - 1] : nullptr;
  }
  return nullptr;
}

double Sampler::term_with_perm(int t, std::span<const int> labels, const Permutation& perm,
                               const Partition* anchor_override, double omega, double grit) const {
  const Partition* anchor = anchor_override ? anchor_override : anchor_for(t);
  if (model_.kind == DependenceKind::kTemporal && t == 0)
    return baseline_log_pmf(model_.initial, canonicalize(labels), perm);
  if (model_.kind == DependenceKind::kIndependent) {
    switch (model_.family) {
      case PriorFamily::kSp: break;
      case PriorFamily::kCpp:
        return cpp_log_unnormalized(CppParams{*anchor, omega, model_.cpp_distance, model_.baseline},
                                    canonicalize(labels));
      case PriorFamily::kLsp: return lsp_log_pmf_labels(LspParams{*anchor, omega}, labels, perm);
      case PriorFamily::kFixed: return canonicalize(labels) == *anchor ? 0.0 : kNegInf;
      case PriorFamily::kBaseline: return baseline_log_pmf(model_.baseline, canonicalize(labels), perm);
    }
  }
  const SpParams params{*anchor, shrinkage_at(t, omega), grit, model_.baseline};
  return sp_log_pmf_labels(params, labels, perm);
}

double Sampler::term(int t, std::span<const int> labels, const Partition* anchor_override, double omega,
                     double grit) const {
  return term_with_perm(t, labels, state_.perms[t], anchor_override, omega, grit);
}

double Sampler::log_prior_term(int t) const {
  return term(t, state_.partitions[t].labels(), nullptr, state_.omega, state_.grit);
}

double Sampler::log_prior_total() const {
  double total = 0.0;
  for (int t = 0; t < data_->times(); ++t) total += log_prior_term(t);
  if (model_.sample_omega && model_.has_sp_terms())
    total += (config_.omega_shape - 1.0) * std::log(state_.omega) - config_.omega_rate * state_.omega;
  if (model_.sample_grit && model_.has_sp_terms())
    total += (config_.grit_a - 1.0) * std::log(state_.grit) + (config_.grit_b - 1.0) * std::log1p(-state_.grit);
  if (model_.kind == DependenceKind::kHierarchical) total += baseline_log_pmf(model_.anchor_prior, state_.anchor);
  return total;
}

double Sampler::sp_terms(double omega, double grit) const {
  double total = 0.0;
  const int first = model_.kind == DependenceKind::kTemporal ? 1 : 0;
  for (int t = first; t < data_->times(); ++t)
    total += term(t, state_.partitions[t].labels(), nullptr, omega, grit);
  return total;
}

void Sampler::initialize() {
  const int n = data_->units(), T = data_->times();
  state_.omega = model_.omega;
  state_.grit = model_.grit;
  state_.perms.clear();
  for (int t = 0; t < T; ++t) state_.perms.push_back(Permutation::random(n, rng_));
  auto draw_baseline = [&](const BaselineSpec& spec, const Permutation& perm) {
    return sp_sample(SpParams::common(Partition::single_cluster(n), 0.0, 0.0, spec), perm, rng_);
  };
  if (model_.kind == DependenceKind::kHierarchical)
    state_.anchor = draw_baseline(model_.anchor_prior, Permutation::identity(n));
  else if (model_.kind == DependenceKind::kIndependent)
    state_.anchor = model_.anchor;
  state_.partitions.assign(T, Partition());
  for (int t = 0; t < T; ++t) {
    Partition& p = state_.partitions[t];
    if (model_.kind == DependenceKind::kTemporal && t == 0) {
      p = draw_baseline(model_.initial, state_.perms[t]);
    } else if (model_.kind == DependenceKind::kIndependent && model_.family != PriorFamily::kSp) {
      p = model_.family == PriorFamily::kBaseline ? draw_baseline(model_.baseline, state_.perms[t]) : model_.anchor;
    } else {
      const SpParams params{*anchor_for(t), shrinkage_at(t, state_.omega), state_.grit, model_.baseline};
      p = sp_sample(params, state_.perms[t], rng_);
    }
  }
  state_.regression.assign(T, TimeParams());
  for (int t = 0; t < T; ++t) {
    TimeParams& tp = state_.regression[t];
    tp.gamma = priors_.mu_gamma;
    tp.tau = priors_.a_tau / priors_.b_tau;
    tp.beta.clear();
    for (int c = 0; c < state_.partitions[t].num_clusters(); ++c) tp.beta.push_back(priors_.mu_beta);
    update_regression(t);
  }
}

void Sampler::update_labels(int t) {
  const int n = data_->units();
  const bool prior_only_fixed = model_.kind == DependenceKind::kIndependent && model_.family == PriorFamily::kFixed;
  if (prior_only_fixed || n == 1) return;
  const bool collapsed = config_.label_update == LabelUpdate::kCollapsed;
  const bool has_next = model_.kind == DependenceKind::kTemporal && t + 1 < data_->times();
  TimeParams& tp = state_.regression[t];

  std::vector<int> labels(state_.partitions[t].labels().begin(), state_.partitions[t].labels().end());
  std::vector<ResidualStats> unit_stats;
  unit_stats.reserve(n);
  for (int i = 0; i < n; ++i) unit_stats.push_back(ResidualStats::of(data_->cell(i, t).stats, tp.gamma));
  std::vector<Eigen::VectorXd> beta_by_label(static_cast<std::size_t>(n) + 2);
  for (int i = 0; i < n; ++i) beta_by_label[labels[i]] = tp.beta[labels[i] - 1];

  std::vector<ResidualStats> sums(static_cast<std::size_t>(n) + 2, ResidualStats(data_->px()));
  std::vector<double> logw;
  for (int i = 0; i < n; ++i) {
    const int old = labels[i];
    const Candidates cand = candidates_without(labels, i);
    const bool singleton = cand.fresh == old;
    Eigen::VectorXd aux;
    if (!collapsed) aux = singleton ? beta_by_label[old] : draw_prior_beta(priors_, rng_);
    if (collapsed) {
      for (int l : cand.labels) sums[l] = ResidualStats(data_->px());
      for (int j = 0; j < n; ++j)
        if (j != i) sums[labels[j]].add(unit_stats[j]);
    }
    const auto& cell = data_->cell(i, t).stats;
    const bool has_rows = cell.rows > 0;

    std::vector<int> options(cand.labels);
    options.push_back(cand.fresh);
    logw.assign(options.size(), 0.0);
    for (std::size_t k = 0; k < options.size(); ++k) {
      const int c = options[k];
      const bool fresh = k + 1 == options.size();
      labels[i] = c;
      double lp = term(t, labels, nullptr, state_.omega, state_.grit);
      if (has_next && lp != kNegInf) {
        const Partition as_anchor = canonicalize(labels);
        lp += term(t + 1, state_.partitions[t + 1].labels(), &as_anchor, state_.omega, state_.grit);
      }
      if (has_rows && lp != kNegInf) {
        if (collapsed) {
          if (fresh) {
            lp += marginal_log_likelihood(unit_stats[i], priors_, tp.tau);
          } else {
            ResidualStats joined = sums[c];
            joined.add(unit_stats[i]);
            lp += marginal_log_likelihood(joined, priors_, tp.tau) - marginal_log_likelihood(sums[c], priors_, tp.tau);
          }
        } else {
          lp += block_log_likelihood(cell, fresh ? aux : beta_by_label[c], tp.gamma, tp.tau);
        }
      }
      logw[k] = lp;
    }
    const std::size_t pick = sample_log_weights(logw, rng_);
    labels[i] = options[pick];
    if (pick + 1 == options.size()) {
      beta_by_label[labels[i]] = collapsed ? (singleton ? beta_by_label[old] : priors_.mu_beta) : aux;
    }
  }

  // Canonical relabeling; coefficients follow their clusters.
  const Partition p = canonicalize(labels);
  std::vector<Eigen::VectorXd> beta(p.num_clusters());
  for (int i = 0; i < n; ++i) beta[p[i] - 1] = beta_by_label[labels[i]];
  state_.partitions[t] = p;
  tp.beta = std::move(beta);
}

void Sampler::update_regression(int t) {
  TimeParams& tp = state_.regression[t];
  const Partition& p = state_.partitions[t];
  tp.beta.resize(p.num_clusters(), priors_.mu_beta);
  std::vector<ResidualStats> sums(p.num_clusters(), ResidualStats(data_->px()));
  for (int i = 0; i < data_->units(); ++i) sums[p[i] - 1].add(ResidualStats::of(data_->cell(i, t).stats, tp.gamma));
  for (int c = 0; c < p.num_clusters(); ++c) tp.beta[c] = draw_beta(sums[c], priors_, tp.tau, rng_);
  tp.gamma = update_gamma(*data_, p, tp, t, priors_, rng_);
  tp.tau = update_tau(*data_, p, tp, t, priors_, rng_);
}

void Sampler::update_permutation(int t) {
  if (model_.kind == DependenceKind::kIndependent &&
      (model_.family == PriorFamily::kCpp || model_.family == PriorFamily::kFixed))
    return;
  const int n = data_->units();
  const int k = std::min(config_.perm_block, n);
  if (k < 2 || config_.perm_attempts == 0) return;
  const auto labels = state_.partitions[t].labels();
  double current = term(t, labels, nullptr, state_.omega, state_.grit);
  std::vector<int> pos(n);
  std::vector<int> items(k);
  for (int a = 0; a < config_.perm_attempts; ++a) {
    std::iota(pos.begin(), pos.end(), 0);
    for (int j = 0; j < k; ++j) std::swap(pos[j], pos[j + uniform_index(rng_, n - j)]);
    Permutation proposal = state_.perms[t];
    auto& order = proposal.mutable_order();
    for (int j = 0; j < k; ++j) items[j] = order[pos[j]];
    for (int j = k - 1; j > 0; --j) std::swap(items[j], items[uniform_index(rng_, j + 1)]);
    for (int j = 0; j < k; ++j) order[pos[j]] = items[j];
    const double prop = term_with_perm(t, labels, proposal, nullptr, state_.omega, state_.grit);
    ++acceptance_.perm_proposed;
    if (std::log(uniform01(rng_)) < prop - current) {
      state_.perms[t] = std::move(proposal);
      current = prop;
      ++acceptance_.perm_accepted;
    }
  }
}

void Sampler::update_shrinkage() {
  if (!model_.sample_omega || !model_.has_sp_terms()) return;
  const double cur = state_.omega;
  const double prop = cur * std::exp(config_.omega_step * standard_normal(rng_));
  if (!(prop > 0.0) || !std::isfinite(prop)) return;
  auto log_target = [&](double w) {
    return (config_.omega_shape - 1.0) * std::log(w) - config_.omega_rate * w + sp_terms(w, state_.grit) + std::log(w);
  };
  ++acceptance_.omega_proposed;
  if (std::log(uniform01(rng_)) < log_target(prop) - log_target(cur)) {
    state_.omega = prop;
    ++acceptance_.omega_accepted;
  }
}

void Sampler::update_grit() {
  if (!model_.sample_grit || !model_.has_sp_terms()) return;
  const double cur = state_.grit;
  const double z = std::log(cur) - std::log1p(-cur) + config_.grit_step * standard_normal(rng_);
  const double prop = 1.0 / (1.0 + std::exp(-z));
  if (!(prop > 0.0 && prop < 1.0)) return;
  auto log_target = [&](double g) {
    // beta prior plus the logit Jacobian g (1 - g)
    return config_.grit_a * std::log(g) + config_.grit_b * std::log1p(-g) + sp_terms(state_.omega, g);
  };
  ++acceptance_.grit_proposed;
  if (std::log(uniform01(rng_)) < log_target(prop) - log_target(cur)) {
    state_.grit = prop;
    ++acceptance_.grit_accepted;
  }
}

void Sampler::update_anchor() {
  if (model_.kind != DependenceKind::kHierarchical) return;
  const int n = data_->units();
  if (n == 1) return;
  auto log_lik = [&](const Partition& mu) {
    double total = 0.0;
    for (int t = 0; t < data_->times(); ++t)
      total += term(t, state_.partitions[t].labels(), &mu, state_.omega, state_.grit);
    return total;
  };
  double current = log_lik(state_.anchor);
  std::vector<double> logw;
  for (int i = 0; i < n; ++i) {
    std::vector<int> labels(state_.anchor.labels().begin(), state_.anchor.labels().end());
    const int old = labels[i];
    const Candidates cand = candidates_without(labels, i);
    std::vector<int> options(cand.labels);
    options.push_back(cand.fresh);
    logw.assign(options.size(), 0.0);
    for (std::size_t k = 0; k < options.size(); ++k) {
      labels[i] = options[k];
      logw[k] = baseline_log_pmf(model_.anchor_prior, canonicalize(labels));
    }
    const int chosen = options[sample_log_weights(logw, rng_)];
    if (chosen == old) continue;
    labels[i] = chosen;
    Partition proposal = canonicalize(labels);
    const double prop = log_lik(proposal);
    ++acceptance_.anchor_proposed;
    if (std::log(uniform01(rng_)) < prop - current) {
      state_.anchor = std::move(proposal);
      current = prop;
      ++acceptance_.anchor_accepted;
    }
  }
}

void Sampler::sweep() {
  const int T = data_->times();
  for (int t = 0; t < T; ++t) {
    update_labels(t);
    update_regression(t);
  }
  for (int t = 0; t < T; ++t) update_permutation(t);
  update_shrinkage();
  update_grit();
  update_anchor();
  ++state_.iteration;
}

ChainResult run_chain(const RegressionDataset& data, const ModelSpec& model, const McmcConfig& config,
                      const RegressionPriors& priors, std::uint64_t seed) {
  const double start = thread_cpu_seconds();
  Sampler sampler(data, model, config, priors, seed);
  ChainResult out;
  out.seed = seed;
  out.draws.reserve(static_cast<std::size_t>((config.iterations - config.burn_in) / config.thin + 1));
  for (int it = 1; it <= config.iterations; ++it) {
    sampler.sweep();
    if (it > config.burn_in && (it - config.burn_in) % config.thin == 0) {
      const auto& s = sampler.state();
      out.draws.push_back({s.iteration, s.partitions, s.perms, s.omega, s.grit, s.anchor, s.regression});
    }
  }
  out.acceptance = sampler.acceptance();
  out.cpu_seconds = thread_cpu_seconds() - start;
  return out;
}

std::vector<ChainResult> run_chains(const RegressionDataset& data, const ModelSpec& model, const McmcConfig& config,
                                    const RegressionPriors& priors) {
  model.validate(data.units(), data.times());
  config.validate();
  std::vector<std::future<ChainResult>> jobs;
  for (int c = 0; c < config.chains; ++c)
    jobs.push_back(std::async(std::launch::async, [&, c] {
      return run_chain(data, model, config, priors, split_seed(config.seed, static_cast<std::uint64_t>(c)));
    }));
  std::vector<ChainResult> out;
  for (auto& j : jobs) out.push_back(j.get());
  return out;
}

double draw_log_likelihood(const RegressionDataset& data, const Draw& d) {
  constexpr double kLog2Pi = 1.8378770664093454836;
  double total = 0.0;
  for (int t = 0; t < data.times(); ++t) {
    const TimeParams& tp = d.regression[t];
    const double half_log_tau = 0.5 * (std::log(tp.tau) - kLog2Pi);
    for (int i = 0; i < data.units(); ++i) {
      const Cell& c = data.cell(i, t);
      if (c.y.size() == 0) continue;
      Eigen::VectorXd r = c.y - c.x * tp.beta[d.partitions[t][i] - 1];
      if (c.z.cols() > 0) r -= c.z * tp.gamma;
      total += static_cast<double>(r.size()) * half_log_tau - 0.5 * tp.tau * r.squaredNorm();
    }
  }
  return total;
}

}  // namespace spd
