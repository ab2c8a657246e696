#include "doctest.h"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <nlohmann/json.hpp>
#include <numbers>
#include <sstream>

#include "../common/conjugate_oracle.hpp"
#include "spd/errors.hpp"
#include "spd/regression.hpp"
#include "spd/stats.hpp"

using namespace spd;

namespace {

RegressionDataset random_dataset(int n, int rows, int px, int pz, Rng& rng) {
  RegressionDataset data(n, 1, px, pz);
  for (int i = 0; i < n; ++i)
    for (int r = 0; r < rows; ++r) {
      Eigen::VectorXd x(px), z(pz);
      x(0) = 1.0;
      for (int k = 1; k < px; ++k) x(k) = standard_normal(rng);
      for (int k = 0; k < pz; ++k) z(k) = standard_normal(rng);
      data.add_row(i, 0, x, z, 1.0 + 0.5 * standard_normal(rng));
    }
  return data;
}

// Normal density written out per observation.
double rowwise_log_likelihood(const RegressionDataset& data, const Partition& p, const TimeParams& tp) {
  double total = 0.0;
  for (int i = 0; i < data.units(); ++i) {
    const auto& c = data.cell(i, 0);
    for (Eigen::Index r = 0; r < c.y.size(); ++r) {
      const double mu = c.x.row(r).dot(tp.beta[p[i] - 1]) + (c.z.cols() ? c.z.row(r).dot(tp.gamma) : 0.0);
      const double e = c.y(r) - mu;
      total += 0.5 * std::log(tp.tau / (2.0 * std::numbers::pi)) - 0.5 * tp.tau * e * e;
    }
  }
  return total;
}

}  // namespace

TEST_CASE("likelihood examples") {
  RegressionDataset data(2, 1, 1, 0);
  Eigen::VectorXd x(1), z(0);
  x << 1.0;
  data.add_row(0, 0, x, z, 2.0);
  data.add_row(0, 0, x, z, 2.0);
  data.add_row(1, 0, x, z, -1.0);
  TimeParams tp{{Eigen::VectorXd::Constant(1, 2.0), Eigen::VectorXd::Constant(1, -1.0)}, Eigen::VectorXd(), 1.0};
  CHECK(log_likelihood(data, Partition::parse("1,2"), tp, 0) ==
        doctest::Approx(1.5 * std::log(1.0 / (2.0 * std::numbers::pi))));

  RegressionDataset one(1, 1, 1, 0);
  one.add_row(0, 0, x, z, 0.0);
  TimeParams t4{{Eigen::VectorXd::Zero(1)}, Eigen::VectorXd(), 4.0};
  CHECK(log_likelihood(one, Partition::parse("1"), t4, 0) == doctest::Approx(0.5 * std::log(4.0 / (2.0 * std::numbers::pi))));
  t4.tau = 0.0;
  CHECK_THROWS_AS(log_likelihood(one, Partition::parse("1"), t4, 0), DomainError);
}

TEST_CASE("cluster-stacked likelihood equals row-by-row evaluation and is relabeling invariant") {
  Rng rng(7);
  const auto data = random_dataset(6, 3, 3, 2, rng);
  const auto p = Partition::parse("1,2,1,3,2,2");
  TimeParams tp;
  for (int c = 0; c < 3; ++c) tp.beta.push_back(Eigen::VectorXd::Random(3));
  tp.gamma = Eigen::VectorXd::Random(2);
  tp.tau = 2.5;
  CHECK(log_likelihood(data, p, tp, 0) == doctest::Approx(rowwise_log_likelihood(data, p, tp)).epsilon(1e-12));
  // Same clusters, units listed in a different order.
  RegressionDataset swapped(6, 1, 3, 2);
  const int order[] = {3, 0, 5, 1, 4, 2};
  std::vector<int> labels(6);
  for (int k = 0; k < 6; ++k) {
    const auto& c = data.cell(order[k], 0);
    for (Eigen::Index r = 0; r < c.y.size(); ++r) swapped.add_row(k, 0, c.x.row(r).transpose(), c.z.row(r).transpose(), c.y(r));
    labels[k] = p[order[k]];
  }
  TimeParams ts = tp;
  const auto q = Partition::from_labels(labels);
  // Canonical relabeling of q: map old labels to new ones.
  ts.beta.assign(3, Eigen::VectorXd());
  for (int k = 0; k < 6; ++k) ts.beta[q[k] - 1] = tp.beta[labels[k] - 1];
  CHECK(log_likelihood(swapped, q, ts, 0) == doctest::Approx(log_likelihood(data, p, tp, 0)).epsilon(1e-12));
}

TEST_CASE("collapsed marginal") {
  RegressionPriors pr = RegressionPriors::defaults(1, 0);
  pr.mu_beta << 0.7;
  pr.lambda_beta << 3.0;
  RegressionDataset data(3, 1, 1, 0);
  Eigen::VectorXd x(1), z(0);
  x << 1.0;
  data.add_row(0, 0, x, z, 1.3);
  data.add_row(1, 0, x, z, 0.2);
  data.add_row(1, 0, x, z, -0.4);
  const double tau = 1.7;
  CHECK(marginal_log_likelihood_cluster(data, 0, {}, pr, z, tau) == 0.0);
  CHECK(marginal_log_likelihood_cluster(data, 0, {2}, pr, z, tau) == 0.0);

  // One observation: y ~ N(mu, 1/tau + 1/lambda).
  const double v = 1.0 / tau + 1.0 / 3.0;
  const double want = -0.5 * std::log(2.0 * std::numbers::pi * v) - 0.5 * (1.3 - 0.7) * (1.3 - 0.7) / v;
  CHECK(marginal_log_likelihood_cluster(data, 0, {0}, pr, z, tau) == doctest::Approx(want).epsilon(1e-13));

  // Numerical integration over beta.
  auto integrand = [&](double b) {
    double lp = 0.5 * std::log(3.0 / (2.0 * std::numbers::pi)) - 1.5 * (b - 0.7) * (b - 0.7);
    for (double y : {1.3, 0.2, -0.4}) lp += 0.5 * std::log(tau / (2.0 * std::numbers::pi)) - 0.5 * tau * (y - b) * (y - b);
    return std::exp(lp);
  };
  const double integral = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, -15.0, 15.0, 15, 1e-14);
  CHECK(std::abs(marginal_log_likelihood_cluster(data, 0, {0, 1}, pr, z, tau) - std::log(integral)) < 1e-6);

  // Joint of two disjoint clusters equals the product of their marginals.
  const double joint = marginal_log_likelihood_cluster(data, 0, {0}, pr, z, tau) +
                       marginal_log_likelihood_cluster(data, 0, {1}, pr, z, tau);
  CHECK(joint != doctest::Approx(marginal_log_likelihood_cluster(data, 0, {0, 1}, pr, z, tau)));
}

TEST_CASE("conjugate draws") {
  Rng rng(11);
  RegressionPriors pr = RegressionPriors::defaults(1, 0);
  pr.mu_beta << 0.5;
  pr.lambda_beta << 4.0;
  RegressionDataset empty(1, 1, 1, 0);
  TimeParams tp{{Eigen::VectorXd::Zero(1)}, Eigen::VectorXd(), 1.0};
  double sum = 0, sq = 0;
  const int draws = 40000;
  for (int i = 0; i < draws; ++i) {
    const double b = update_beta_star(empty, Partition::parse("1"), tp, 0, 1, pr, rng)(0);
    sum += b;
    sq += b * b;
  }
  CHECK(sum / draws == doctest::Approx(0.5).epsilon(0.01));
  CHECK(sq / draws - (sum / draws) * (sum / draws) == doctest::Approx(0.25).epsilon(0.03));

  // 1-D posterior: precision 4 + tau * 2, mean (4*0.5 + tau*(1+3)) / precision.
  RegressionDataset d(1, 1, 1, 0);
  Eigen::VectorXd x(1), z(0);
  x << 1.0;
  d.add_row(0, 0, x, z, 1.0);
  d.add_row(0, 0, x, z, 3.0);
  tp.tau = 2.0;
  sum = 0;
  for (int i = 0; i < draws; ++i) sum += update_beta_star(d, Partition::parse("1"), tp, 0, 1, pr, rng)(0);
  CHECK(sum / draws == doctest::Approx((2.0 + 8.0) / 8.0).epsilon(0.005));
  tp.tau = 1e-12;
  sum = 0;
  for (int i = 0; i < 2000; ++i) sum += update_beta_star(d, Partition::parse("1"), tp, 0, 1, pr, rng)(0);
  CHECK(sum / 2000 == doctest::Approx(0.5).epsilon(0.05));

  // Gamma full conditional: shape a + m/2, rate b + SSR/2 with SSR = (1-1)^2 + (3-1)^2 = 4.
  tp.tau = 1.0;
  tp.beta = {Eigen::VectorXd::Constant(1, 1.0)};
  sum = 0;
  for (int i = 0; i < draws; ++i) sum += update_tau(d, Partition::parse("1"), tp, 0, pr, rng);
  CHECK(sum / draws == doctest::Approx((pr.a_tau + 1.0) / (pr.b_tau + 2.0)).epsilon(0.01));
  sum = 0;
  for (int i = 0; i < draws; ++i) sum += update_tau(empty, Partition::parse("1"), tp, 0, pr, rng);
  CHECK(sum / draws == doctest::Approx(pr.a_tau / pr.b_tau).epsilon(0.01));
}

TEST_CASE("Gibbs moments match the quadrature oracle") {
  const auto data = oracle::tiny_dataset();
  const auto pr = oracle::tiny_priors();
  const auto p = Partition::parse("1,2,1");
  const auto want = oracle::posterior_moments(data, p, 0, pr);
  Rng rng(2024);
  TimeParams tp{{pr.mu_beta, pr.mu_beta}, pr.mu_gamma, 1.0};
  const int dim = static_cast<int>(want.mean.size());
  std::vector<std::vector<double>> first(dim), second(dim);
  for (int it = 0; it < 60000; ++it) {
    for (int c = 1; c <= 2; ++c) tp.beta[c - 1] = update_beta_star(data, p, tp, 0, c, pr, rng);
    tp.gamma = update_gamma(data, p, tp, 0, pr, rng);
    tp.tau = update_tau(data, p, tp, 0, pr, rng);
    if (it < 1000) continue;
    std::vector<double> v{tp.beta[0](0), tp.beta[0](1), tp.beta[1](0), tp.beta[1](1), tp.gamma(0), tp.tau};
    for (int k = 0; k < dim; ++k) {
      first[k].push_back(v[k]);
      second[k].push_back(v[k] * v[k]);
    }
  }
  for (int k = 0; k < dim; ++k) {
    INFO("component " << k);
    CHECK(std::abs(mean(first[k]) - want.mean(k)) < 3.0 * obm_standard_error(first[k]));
    CHECK(std::abs(mean(second[k]) - want.second(k)) < 3.0 * obm_standard_error(second[k]));
  }
}

TEST_CASE("CSV round trip and validation") {
  std::istringstream in(
      "unit_id,time_id,y,x_1,z_1,z_2\n"
      "ca,1994,1.5,1,0.2,3\n"
      "dc,1994,1.1,0,0.1,2\n"
      "ca,1995,1.7,1,0.4,1\n");
  const auto data = read_dataset_csv(in);
  CHECK(data.units() == 2);
  CHECK(data.times() == 2);
  CHECK(data.px() == 2);
  CHECK(data.pz() == 2);
  CHECK(data.unit_ids == std::vector<std::string>{"ca", "dc"});
  CHECK(data.cell(0, 1).x(0, 0) == 1.0);
  CHECK(data.cell(1, 1).stats.rows == 0);
  CHECK(data.total_rows() == 3);
  std::ostringstream out;
  write_dataset_csv(data, out);
  std::istringstream again(out.str());
  const auto back = read_dataset_csv(again);
  CHECK(back.cell(0, 0).y(0) == 1.5);
  CHECK(back.cell(1, 0).z(0, 1) == 2.0);

  std::istringstream bad("unit_id,time_id,y\nA,1,abc\n");
  CHECK_THROWS_AS(read_dataset_csv(bad), DomainError);
  std::istringstream missing("unit_id,y\nA,1\n");
  CHECK_THROWS_AS(read_dataset_csv(missing), DomainError);
}

TEST_CASE("priors") {
  const auto d = RegressionPriors::defaults(4, 9);
  CHECK(d.mu_beta(0) == 1.46);
  CHECK(d.lambda_beta(2, 2) == 100.0);
  CHECK(d.a_tau == doctest::Approx(7.6733));
  auto j = priors_to_json(d);
  const auto back = priors_from_json(j, 4, 9);
  CHECK(back.mu_beta == d.mu_beta);
  nlohmann::json bad = {{"lambda_beta", -1.0}};
  CHECK_THROWS_AS(priors_from_json(bad, 4, 9), DomainError);
}
