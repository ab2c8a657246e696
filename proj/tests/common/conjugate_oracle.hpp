// Posterior moments of (beta*, gamma, tau) for a fixed partition at one time
// point.  Coefficients are integrated out in covariance form,
//   y | tau ~ N(W m0, tau^{-1} I + W L0^{-1} W'),
// and the remaining 1-D integral over tau is done by quadrature.
#pragma once

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <vector>

#include "spd/regression.hpp"

namespace oracle {

struct Moments {
  Eigen::VectorXd mean;  // (beta*_1, ..., beta*_q, gamma, tau)
  Eigen::VectorXd second;
};

struct Design {
  Eigen::MatrixXd w;  // rows x (q px + pz)
  Eigen::VectorXd y;
  Eigen::VectorXd m0;
  Eigen::MatrixXd l0;  // prior precision
};

inline Design design(const spd::RegressionDataset& data, const spd::Partition& p, int t,
                     const spd::RegressionPriors& pr) {
  const int q = p.num_clusters(), px = data.px(), pz = data.pz();
  const int dim = q * px + pz;
  std::vector<Eigen::RowVectorXd> rows;
  std::vector<double> ys;
  for (int i = 0; i < data.units(); ++i) {
    const auto& c = data.cell(i, t);
    for (Eigen::Index r = 0; r < c.y.size(); ++r) {
      Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(dim);
      row.segment((p[i] - 1) * px, px) = c.x.row(r);
      if (pz) row.tail(pz) = c.z.row(r);
      rows.push_back(row);
      ys.push_back(c.y(r));
    }
  }
  Design d;
  d.w.resize(static_cast<Eigen::Index>(rows.size()), dim);
  d.y.resize(static_cast<Eigen::Index>(ys.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    d.w.row(static_cast<Eigen::Index>(r)) = rows[r];
    d.y(static_cast<Eigen::Index>(r)) = ys[r];
  }
  d.m0.resize(dim);
  d.l0 = Eigen::MatrixXd::Zero(dim, dim);
  for (int c = 0; c < q; ++c) {
    d.m0.segment(c * px, px) = pr.mu_beta;
    d.l0.block(c * px, c * px, px, px) = pr.lambda_beta;
  }
  if (pz) {
    d.m0.tail(pz) = pr.mu_gamma;
    d.l0.bottomRightCorner(pz, pz) = pr.lambda_gamma;
  }
  return d;
}

inline double log_tau_posterior(const Design& d, const spd::RegressionPriors& pr, double tau) {
  const Eigen::Index m = d.y.size();
  const Eigen::MatrixXd cov =
      Eigen::MatrixXd::Identity(m, m) / tau + d.w * d.l0.inverse() * d.w.transpose();
  const Eigen::LDLT<Eigen::MatrixXd> ldlt(cov);
  const Eigen::VectorXd r = d.y - d.w * d.m0;
  const double logdet = ldlt.vectorD().array().log().sum();
  const double quad = r.dot(ldlt.solve(r));
  return (pr.a_tau - 1.0) * std::log(tau) - pr.b_tau * tau - 0.5 * logdet - 0.5 * quad;
}

inline Moments posterior_moments(const spd::RegressionDataset& data, const spd::Partition& p, int t,
                                 const spd::RegressionPriors& pr) {
  const Design d = design(data, p, t, pr);
  const Eigen::Index dim = d.m0.size();
  // Locate the bulk of p(log tau | y) on a grid, then integrate over log tau.
  double best = -1e300, best_u = 0.0;
  for (double u = -10.0; u <= 10.0; u += 0.01) {
    const double v = log_tau_posterior(d, pr, std::exp(u)) + u;
    if (v > best) best = v, best_u = u;
  }
  const double lo = best_u - 8.0, hi = best_u + 8.0;
  auto weight = [&](double u) { return std::exp(log_tau_posterior(d, pr, std::exp(u)) + u - best); };
  auto integrate = [&](auto f) {
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, lo, hi, 15, 1e-13);
  };
  const double z = integrate(weight);
  Moments out;
  out.mean.resize(dim + 1);
  out.second.resize(dim + 1);
  auto cond = [&](double tau, Eigen::VectorXd& mean, Eigen::VectorXd& var) {
    const Eigen::MatrixXd prec = d.l0 + tau * d.w.transpose() * d.w;
    const Eigen::MatrixXd cov = prec.inverse();
    mean = cov * (d.l0 * d.m0 + tau * d.w.transpose() * d.y);
    var = cov.diagonal();
  };
  for (Eigen::Index k = 0; k < dim; ++k) {
    out.mean(k) = integrate([&](double u) {
                    Eigen::VectorXd m, v;
                    cond(std::exp(u), m, v);
                    return weight(u) * m(k);
                  }) / z;
    out.second(k) = integrate([&](double u) {
                      Eigen::VectorXd m, v;
                      cond(std::exp(u), m, v);
                      return weight(u) * (m(k) * m(k) + v(k));
                    }) / z;
  }
  out.mean(dim) = integrate([&](double u) { return weight(u) * std::exp(u); }) / z;
  out.second(dim) = integrate([&](double u) { return weight(u) * std::exp(2.0 * u); }) / z;
  return out;
}

/// The tiny instance: 3 units, 1 time point, 2 rows each, px = 2, pz = 1.
inline spd::RegressionDataset tiny_dataset() {
  spd::RegressionDataset data(3, 1, 2, 1);
  const double xs[3][2] = {{0.0, 1.0}, {1.0, 0.0}, {0.5, 1.0}};
  const double zs[3][2] = {{0.3, -0.8}, {1.1, 0.2}, {-0.5, 0.7}};
  const double ys[3][2] = {{1.2, 2.3}, {2.9, 2.2}, {0.4, 1.1}};
  for (int i = 0; i < 3; ++i)
    for (int r = 0; r < 2; ++r) {
      Eigen::VectorXd x(2), z(1);
      x << 1.0, xs[i][r];
      z << zs[i][r];
      data.add_row(i, 0, x, z, ys[i][r]);
    }
  return data;
}

inline spd::RegressionPriors tiny_priors() {
  spd::RegressionPriors pr = spd::RegressionPriors::defaults(2, 1);
  pr.mu_beta << 1.0, 0.5;
  pr.lambda_beta = Eigen::MatrixXd::Identity(2, 2);
  pr.lambda_gamma = 2.0 * Eigen::MatrixXd::Identity(1, 1);
  pr.a_tau = 2.0;
  pr.b_tau = 1.0;
  return pr;
}

}  // namespace oracle
