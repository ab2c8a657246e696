#ifndef SPD_CONFIG_HPP
#define SPD_CONFIG_HPP

#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "spd/mcmc.hpp"
#include "spd/synth.hpp"

namespace spd {

/// A standalone partition distribution, as used by `pmf` and `sample`.
struct DistributionSpec {
  PriorFamily family = PriorFamily::kSp;
  SpParams sp;
  CppParams cpp;
  LspParams lsp;
  BaselineSpec baseline = EwensPitman{};
  std::vector<double> weights;             // per-item shrinkage multipliers; empty means 1
  std::optional<Permutation> permutation;  // empty: marginalize over permutations
  std::vector<double> omega_grid;          // pmf only; empty means the single configured value

  std::size_t size() const;
  /// Copy with the common shrinkage replaced by `omega` (per-item weights kept).
  DistributionSpec with_omega(double omega) const;
};

struct RunConfig {
  ModelSpec model;
  McmcConfig mcmc;
  RegressionPriors priors;
  bool priors_set = false;
  nlohmann::json priors_json;  // applied once data dimensions are known
  std::string data_path;
  std::string output_dir = "spd_out";
  int folds = 10;
  std::uint64_t fold_seed = 1;
  std::optional<nlohmann::json> distribution_json;
  std::size_t sample_count = 10;
  SynthSpec synth;
  std::uint64_t verify_seed = 20240601;
  nlohmann::json raw;
};

/// Every key is optional; defaults match the library defaults.  Throws
/// DomainError on unknown enum names or malformed values.
RunConfig config_from_json(const nlohmann::json& j);
RunConfig load_config(const std::string& path);

/// Resolves the data-dependent parts (anchor size, uniform baseline size,
/// priors) once the number of units and covariate dimensions are known.
void bind_to_data(RunConfig& c, int units, int times, int px, int pz);

DistributionSpec distribution_from_json(const nlohmann::json& j);

DependenceKind dependence_from_string(const std::string& s);
PriorFamily family_from_string(const std::string& s);

nlohmann::json model_to_json(const ModelSpec& m);
nlohmann::json mcmc_to_json(const McmcConfig& c);

}  // namespace spd

#endif  // SPD_CONFIG_HPP
