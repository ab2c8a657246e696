#ifndef SPD_CROSSVAL_HPP
#define SPD_CROSSVAL_HPP

#include <cstdint>
#include <vector>

#include "spd/mcmc.hpp"

namespace spd {

/// Fold of every row, in (time, unit, row) order.  Rows are shuffled with
/// `seed` and dealt round-robin, so fold sizes differ by at most one.
std::vector<int> fold_assignment(std::size_t rows, int folds, std::uint64_t seed);

struct DatasetSplit {
  RegressionDataset train;
  RegressionDataset test;
};

DatasetSplit split_fold(const RegressionDataset& data, const std::vector<int>& assignment, int fold);

struct FoldScore {
  int fold = 0;
  std::size_t held_out_rows = 0;
  double estimate = 0.0;  // mean over draws of the held-out log-likelihood
  double standard_error = 0.0;
  double cpu_seconds = 0.0;
};

struct CrossValResult {
  double estimate = 0.0;
  double margin = 0.0;  // half-width of the 95% Monte Carlo interval
  double cpu_seconds = 0.0;
  std::vector<FoldScore> folds;
};

/// Scores one fitted fold: per-draw held-out log-likelihood, pooled over
/// chains, with an overlapping-batch-means standard error per chain.
FoldScore score_fold(const RegressionDataset& test, const std::vector<ChainResult>& chains);

/// k-fold out-of-sample log-likelihood.  Fold f fits with seed
/// split_seed(config.seed, 1000 + f).
CrossValResult cross_validate(const RegressionDataset& data, const ModelSpec& model, const McmcConfig& config,
                              const RegressionPriors& priors, int folds, std::uint64_t fold_seed);

}  // namespace spd

#endif  // SPD_CROSSVAL_HPP
