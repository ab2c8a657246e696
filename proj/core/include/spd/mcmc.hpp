#ifndef SPD_MCMC_HPP
#define SPD_MCMC_HPP

#include <cstdint>
#include <vector>

#include "spd/reference.hpp"
#include "spd/regression.hpp"
#include "spd/shrinkage.hpp"

namespace spd {

enum class DependenceKind { kIndependent, kHierarchical, kTemporal };
enum class PriorFamily { kSp, kCpp, kLsp, kFixed, kBaseline };
enum class LabelUpdate { kCollapsed, kNeal8 };

std::string to_string(DependenceKind k);
std::string to_string(PriorFamily f);

/// Prior structure over pi_1..pi_T.
///  independent:  pi_t ~ family(anchor, omega, psi, baseline) for each t
///  hierarchical: mu ~ anchor_prior, pi_t | mu ~ SP(mu, omega, psi, baseline)
///  temporal:     pi_1 ~ initial, pi_t | pi_{t-1} ~ SP(pi_{t-1}, omega / d_t, psi, baseline)
struct ModelSpec {
  DependenceKind kind = DependenceKind::kIndependent;
  PriorFamily family = PriorFamily::kSp;
  BaselineSpec baseline = EwensPitman{};
  Partition anchor;
  BaselineSpec anchor_prior = EwensPitman{};
  BaselineSpec initial = EwensPitman{};
  std::vector<double> spacing;            // d_2..d_T; empty means 1
  std::vector<double> shrinkage_weights;  // omega_i = omega * w_i; empty means 1
  PartitionDistance cpp_distance = PartitionDistance::kVariationOfInformation;

  double omega = 4.0;
  double grit = -0.035;
  bool sample_omega = false;
  bool sample_grit = false;

  void validate(int n_units, int n_times) const;
  /// True when pi_t's prior term involves omega and psi (SP terms).
  bool has_sp_terms() const;
};

struct McmcConfig {
  int iterations = 55000;
  int burn_in = 5000;
  int thin = 10;
  int perm_attempts = 10;
  int perm_block = 10;
  double omega_shape = 5.0;
  double omega_rate = 1.0;
  double grit_a = 1.0;
  double grit_b = 9.0;
  double omega_step = 0.5;
  double grit_step = 0.5;
  LabelUpdate label_update = LabelUpdate::kCollapsed;
  std::uint64_t seed = 1;
  int chains = 1;

  /// Defaults; permutation proposals 10 x 10 (independent) or
  /// 200 x 5 (dependent).
  static McmcConfig defaults_for(DependenceKind kind);
  void validate() const;
};

struct ChainState {
  std::vector<Partition> partitions;
  std::vector<Permutation> perms;
  double omega = 0.0;
  double grit = 0.0;
  Partition anchor;
  std::vector<TimeParams> regression;
  long iteration = 0;
};

struct AcceptanceStats {
  long perm_proposed = 0, perm_accepted = 0;
  long omega_proposed = 0, omega_accepted = 0;
  long grit_proposed = 0, grit_accepted = 0;
  long anchor_proposed = 0, anchor_accepted = 0;

  void add(const AcceptanceStats& o);
  static double rate(long accepted, long proposed) {
    return proposed ? static_cast<double>(accepted) / static_cast<double>(proposed) : 0.0;
  }
};

class Sampler {
 public:
  Sampler(const RegressionDataset& data, ModelSpec model, McmcConfig config, RegressionPriors priors,
          std::uint64_t seed);

  const ChainState& state() const { return state_; }
  ChainState& mutable_state() { return state_; }
  const AcceptanceStats& acceptance() const { return acceptance_; }
  const ModelSpec& model() const { return model_; }
  const McmcConfig& config() const { return config_; }

  /// Log prior term of the partition at time t under the current state.
  double log_prior_term(int t) const;
  /// Sum of the partition prior terms plus the omega / psi / anchor priors.
  double log_prior_total() const;
  /// Shrinkage vector used by the SP term of time t.
  std::vector<double> shrinkage_at(int t, double omega) const;

  void update_labels(int t);
  void update_regression(int t);
  void update_permutation(int t);
  void update_shrinkage();
  void update_grit();
  void update_anchor();
  /// One full iteration of the schedule.
  void sweep();

 private:
  double term(int t, std::span<const int> labels, const Partition* anchor_override, double omega, double grit) const;
  double term_with_perm(int t, std::span<const int> labels, const Permutation& perm, const Partition* anchor_override,
                        double omega, double grit) const;
  const Partition* anchor_for(int t) const;
  double sp_terms(double omega, double grit) const;
  void initialize();

  const RegressionDataset* data_;
  ModelSpec model_;
  McmcConfig config_;
  RegressionPriors priors_;
  Rng rng_;
  ChainState state_;
  AcceptanceStats acceptance_;
};

struct Draw {
  long iteration = 0;
  std::vector<Partition> partitions;
  std::vector<Permutation> perms;
  double omega = 0.0;
  double grit = 0.0;
  Partition anchor;
  std::vector<TimeParams> regression;
};

struct ChainResult {
  std::uint64_t seed = 0;
  std::vector<Draw> draws;
  AcceptanceStats acceptance;
  double cpu_seconds = 0.0;
};

/// Runs one chain and keeps post-burn-in draws every `thin` iterations.
ChainResult run_chain(const RegressionDataset& data, const ModelSpec& model, const McmcConfig& config,
                      const RegressionPriors& priors, std::uint64_t seed);

/// config.chains independent chains in parallel, chain c seeded with
/// split_seed(config.seed, c).
std::vector<ChainResult> run_chains(const RegressionDataset& data, const ModelSpec& model, const McmcConfig& config,
                                    const RegressionPriors& priors);

/// Log-likelihood of every row in `data` under one draw.
double draw_log_likelihood(const RegressionDataset& data, const Draw& d);

}  // namespace spd

#endif  // SPD_MCMC_HPP
