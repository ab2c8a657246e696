#ifndef SPD_SUMMARY_HPP
#define SPD_SUMMARY_HPP

#include <Eigen/Dense>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "spd/mcmc.hpp"

namespace spd {

/// Pairwise co-clustering frequencies.  Symmetric with unit diagonal.
Eigen::MatrixXd coclustering(const std::vector<Partition>& samples);

/// Sum over pairs i < j of |1[p_i = p_j] - P_ij|.
double expected_binder_loss(const Partition& p, const Eigen::MatrixXd& cocluster);

/// The sampled partition minimizing expected Binder loss (first on ties).
Partition point_estimate(const std::vector<Partition>& samples);

/// Posterior mean ARI between every pair of time points.
Eigen::MatrixXd ari_matrix(const std::vector<std::vector<Partition>>& draws);

/// Mean ARI between time points `lag` apart, averaged over pairs and draws,
/// one value per draw.
std::vector<double> lagged_ari(const std::vector<std::vector<Partition>>& draws, int lag);

struct PosteriorSummary {
  std::size_t draws = 0;
  std::vector<Partition> point_estimates;     // per t
  std::vector<Eigen::MatrixXd> cocluster;     // per t
  Eigen::MatrixXd ari;                        // T x T
  double omega_mean = 0.0, grit_mean = 0.0;
  AcceptanceStats acceptance;
  double cpu_seconds = 0.0;
};

/// Pooled over chains; partitions_by_draw[d][t].
PosteriorSummary summarize(const std::vector<std::vector<Partition>>& partitions_by_draw);
PosteriorSummary summarize(const std::vector<ChainResult>& chains);

nlohmann::json summary_to_json(const PosteriorSummary& s);

}  // namespace spd

#endif  // SPD_SUMMARY_HPP
