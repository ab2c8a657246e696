#ifndef SPD_SYNTH_HPP
#define SPD_SYNTH_HPP

#include <cstdint>
#include <iosfwd>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "spd/regression.hpp"

namespace spd {

/// Panel generator for the regression likelihood.  X is an intercept plus a
/// one-hot categorical covariate with px - 1 non-reference levels; Z is
/// standard normal.  Units belong to latent groups with fixed coefficients:
/// intercepts evenly spaced `beta_spread` apart around beta_center, other
/// coefficients perturbed by N(0, slope_spread^2).  Between consecutive time
/// points each unit moves to a uniformly chosen other group with
/// probability `drift`.
struct SynthSpec {
  int units = 20;
  int times = 10;
  int rows_per_cell = 3;
  int px = 4;
  int pz = 1;
  int groups = 3;
  double drift = 0.1;
  double tau = 4.0;
  double beta_spread = 0.4;
  double slope_spread = 0.0;
  Eigen::VectorXd beta_center;  // empty means zeros
  Eigen::VectorXd gamma;         // empty means all 0.5
  std::vector<Partition> partitions;  // explicit truth; overrides groups/drift
  std::uint64_t seed = 1;

  void validate() const;
};

struct SynthTruth {
  std::vector<Partition> partitions;
  std::vector<std::vector<int>> groups;  // groups[t][i], 1-based
  std::vector<Eigen::VectorXd> group_beta;
  Eigen::VectorXd gamma;
  double tau = 1.0;
};

struct SynthResult {
  RegressionDataset data;
  SynthTruth truth;
};

SynthResult generate_synthetic(const SynthSpec& spec);

SynthSpec synth_spec_from_json(const nlohmann::json& j);
nlohmann::json truth_to_json(const SynthTruth& truth);

}  // namespace spd

#endif  // SPD_SYNTH_HPP
