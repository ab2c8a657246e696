#ifndef SPD_REGRESSION_HPP
#define SPD_REGRESSION_HPP

#include <Eigen/Dense>
#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "spd/numeric.hpp"
#include "spd/partition.hpp"

namespace spd {

/// Sufficient statistics of one block of rows.
struct CellStats {
  Eigen::MatrixXd xtx, xtz, ztz;
  Eigen::VectorXd xty, zty;
  double yty = 0.0;
  int rows = 0;

  CellStats() = default;
  CellStats(int px, int pz);
  void add(const CellStats& other);
  void add_row(const Eigen::VectorXd& x, const Eigen::VectorXd& z, double y);
};

/// Rows observed for one unit at one time point.
struct Cell {
  Eigen::MatrixXd x;  // rows x px (intercept included)
  Eigen::MatrixXd z;  // rows x pz
  Eigen::VectorXd y;
  CellStats stats;
};

/// Panel of n units over T time points.  Cells may be empty.
class RegressionDataset {
 public:
  RegressionDataset() = default;
  RegressionDataset(int n_units, int n_times, int px, int pz);

  int units() const { return n_; }
  int times() const { return t_; }
  int px() const { return px_; }
  int pz() const { return pz_; }

  const Cell& cell(int unit, int time) const { return cells_[index(unit, time)]; }
  void add_row(int unit, int time, const Eigen::VectorXd& x, const Eigen::VectorXd& z, double y);

  std::size_t rows_at(int time) const;
  std::size_t total_rows() const;

  std::vector<std::string> unit_ids;
  std::vector<std::string> time_ids;

 private:
  std::size_t index(int unit, int time) const {
    return static_cast<std::size_t>(time) * static_cast<std::size_t>(n_) + static_cast<std::size_t>(unit);
  }
  int n_ = 0, t_ = 0, px_ = 0, pz_ = 0;
  std::vector<Cell> cells_;
};

/// Long-format CSV with header unit_id,time_id,y,x_1..,z_1..  An intercept
/// column is prepended to X.  Ids are dense-reindexed by first appearance.
RegressionDataset read_dataset_csv(std::istream& in);
RegressionDataset read_dataset_csv(const std::string& path);
void write_dataset_csv(const RegressionDataset& data, std::ostream& out);

struct RegressionPriors {
  Eigen::VectorXd mu_beta;
  Eigen::MatrixXd lambda_beta;  // precision
  Eigen::VectorXd mu_gamma;
  Eigen::MatrixXd lambda_gamma;  // precision
  double a_tau = 1.0 / (0.361 * 0.361);
  double b_tau = 1.0;

  /// Defaults: mu_beta = (1.46, 0.15, 0.24, 0.41) when px = 4 (zeros
  /// otherwise), Lambda_beta = 100 I, mu_gamma = 0, Lambda_gamma = I.
  static RegressionPriors defaults(int px, int pz);
  void validate(int px, int pz) const;
};

/// Overrides any of mu_beta, lambda_beta (scalar or matrix), mu_gamma,
/// lambda_gamma, a_tau, b_tau.
RegressionPriors priors_from_json(const nlohmann::json& j, int px, int pz);
nlohmann::json priors_to_json(const RegressionPriors& p);

/// Regression parameters for one time point.
struct TimeParams {
  std::vector<Eigen::VectorXd> beta;  // beta[c-1] for cluster c
  Eigen::VectorXd gamma;
  double tau = 1.0;
};

/// Log density of one block of rows given coefficients.
double block_log_likelihood(const CellStats& s, const Eigen::VectorXd& beta, const Eigen::VectorXd& gamma, double tau);

/// Sum over clusters of N(y_ct | X_ct beta*_c + Z_ct gamma, tau I).
double log_likelihood(const RegressionDataset& data, const Partition& p, const TimeParams& params, int t);

/// Stats of the residual y - Z gamma for one block: (X'r, r'r, rows) plus X'X.
struct ResidualStats {
  Eigen::MatrixXd xtx;
  Eigen::VectorXd xtr;
  double rtr = 0.0;
  int rows = 0;

  ResidualStats() = default;
  explicit ResidualStats(int px) : xtx(Eigen::MatrixXd::Zero(px, px)), xtr(Eigen::VectorXd::Zero(px)) {}
  static ResidualStats of(const CellStats& s, const Eigen::VectorXd& gamma);
  void add(const ResidualStats& o);
  void remove(const ResidualStats& o);
};

/// log of the integral of N(r | X beta, tau I) N(beta | mu_beta, Lambda_beta) over beta.
double marginal_log_likelihood(const ResidualStats& s, const RegressionPriors& priors, double tau);

/// Collapsed marginal of the members' rows at time t (beta* integrated out).
double marginal_log_likelihood_cluster(const RegressionDataset& data, int t, const std::vector<int>& members,
                                       const RegressionPriors& priors, const Eigen::VectorXd& gamma, double tau);

/// Full-conditional draws.
Eigen::VectorXd draw_beta(const ResidualStats& s, const RegressionPriors& priors, double tau, Rng& rng);
Eigen::VectorXd update_beta_star(const RegressionDataset& data, const Partition& p, const TimeParams& params, int t,
                                 int cluster, const RegressionPriors& priors, Rng& rng);
Eigen::VectorXd update_gamma(const RegressionDataset& data, const Partition& p, const TimeParams& params, int t,
                             const RegressionPriors& priors, Rng& rng);
double update_tau(const RegressionDataset& data, const Partition& p, const TimeParams& params, int t,
                  const RegressionPriors& priors, Rng& rng);

/// Normal draw with mean P^{-1} b and precision P.  NumericalError if P is
/// not positive definite.
Eigen::VectorXd draw_normal_precision(const Eigen::MatrixXd& precision, const Eigen::VectorXd& b, Rng& rng);
Eigen::VectorXd draw_prior_beta(const RegressionPriors& priors, Rng& rng);

double standard_normal(Rng& rng);
double gamma_draw(double shape, double rate, Rng& rng);

}  // namespace spd

#endif  // SPD_REGRESSION_HPP
