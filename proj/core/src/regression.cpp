#include "spd/regression.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <numbers>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "spd/errors.hpp"

namespace spd {

CellStats::CellStats(int px, int pz)
    : xtx(Eigen::MatrixXd::Zero(px, px)),
      xtz(Eigen::MatrixXd::Zero(px, pz)),
      ztz(Eigen::MatrixXd::Zero(pz, pz)),
      xty(Eigen::VectorXd::Zero(px)),
      zty(Eigen::VectorXd::Zero(pz)) {}

void CellStats::add(const CellStats& o) {
  xtx += o.xtx;
  xtz += o.xtz;
  ztz += o.ztz;
  xty += o.xty;
  zty += o.zty;
  yty += o.yty;
  rows += o.rows;
}

void CellStats::add_row(const Eigen::VectorXd& x, const Eigen::VectorXd& z, double y) {
  xtx.noalias() += x * x.transpose();
  xtz.noalias() += x * z.transpose();
  ztz.noalias() += z * z.transpose();
  xty += y * x;
  zty += y * z;
  yty += y * y;
  ++rows;
}

RegressionDataset::RegressionDataset(int n_units, int n_times, int px, int pz)
    : n_(n_units), t_(n_times), px_(px), pz_(pz) {
  if (n_units < 1 || n_times < 1 || px < 1 || pz < 0) throw DomainError("dataset dimensions must be positive");
  cells_.resize(static_cast<std::size_t>(n_units) * n_times);
  for (auto& c : cells_) {
    c.x.resize(0, px);
    c.z.resize(0, pz);
    c.stats = CellStats(px, pz);
  }
  unit_ids.resize(n_units);
  time_ids.resize(n_times);
  for (int i = 0; i < n_units; ++i) unit_ids[i] = std::to_string(i + 1);
  for (int t = 0; t < n_times; ++t) time_ids[t] = std::to_string(t + 1);
}

void RegressionDataset::add_row(int unit, int time, const Eigen::VectorXd& x, const Eigen::VectorXd& z, double y) {
  if (unit < 0 || unit >= n_ || time < 0 || time >= t_) throw DomainError("row outside the panel");
  if (x.size() != px_ || z.size() != pz_) throw DomainError("covariate width differs from the dataset");
  Cell& c = cells_[index(unit, time)];
  const Eigen::Index r = c.x.rows();
  c.x.conservativeResize(r + 1, Eigen::NoChange);
  c.z.conservativeResize(r + 1, Eigen::NoChange);
  c.y.conservativeResize(r + 1);
  c.x.row(r) = x.transpose();
  c.z.row(r) = z.transpose();
  c.y(r) = y;
  c.stats.add_row(x, z, y);
}

std::size_t RegressionDataset::rows_at(int time) const {
  std::size_t total = 0;
  for (int i = 0; i < n_; ++i) total += cell(i, time).stats.rows;
  return total;
}

std::size_t RegressionDataset::total_rows() const {
  std::size_t total = 0;
  for (int t = 0; t < t_; ++t) total += rows_at(t);
  return total;
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) {
    while (!field.empty() && (field.back() == '\r' || field.back() == ' ')) field.pop_back();
    while (!field.empty() && field.front() == ' ') field.erase(0, 1);
    out.push_back(field);
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_number(const std::string& s, std::size_t line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size() || !std::isfinite(v)) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw DomainError("line " + std::to_string(line) + ": '" + s + "' is not a finite number");
  }
}

}  // namespace

RegressionDataset read_dataset_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DomainError("dataset CSV is empty");
  const auto header = split_csv(line);
  int unit_col = -1, time_col = -1, y_col = -1;
  std::vector<int> x_cols, z_cols;
  for (int c = 0; c < static_cast<int>(header.size()); ++c) {
    const auto& h = header[c];
    if (h == "unit_id")
      unit_col = c;
    else if (h == "time_id")
      time_col = c;
    else if (h == "y")
      y_col = c;
    else if (h.rfind("x_", 0) == 0)
      x_cols.push_back(c);
    else if (h.rfind("z_", 0) == 0)
      z_cols.push_back(c);
    else
      throw DomainError("unexpected CSV column '" + h + "'");
  }
  if (unit_col < 0 || time_col < 0 || y_col < 0) throw DomainError("CSV header needs unit_id, time_id and y");

  struct Row {
    int unit, time;
    Eigen::VectorXd x, z;
    double y;
  };
  std::vector<Row> rows;
  std::map<std::string, int> units, times;
  std::vector<std::string> unit_names, time_names;
  const int px = static_cast<int>(x_cols.size()) + 1;
  const int pz = static_cast<int>(z_cols.size());
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto f = split_csv(line);
    if (f.size() != header.size())
      throw DomainError("line " + std::to_string(line_no) + ": expected " + std::to_string(header.size()) + " fields");
    auto id_of = [](std::map<std::string, int>& ids, std::vector<std::string>& names, const std::string& key) {
      auto [it, fresh] = ids.emplace(key, static_cast<int>(names.size()));
      if (fresh) names.push_back(key);
      return it->second;
    };
    Row r;
    r.unit = id_of(units, unit_names, f[unit_col]);
    r.time = id_of(times, time_names, f[time_col]);
    r.y = parse_number(f[y_col], line_no);
    r.x.resize(px);
    r.x(0) = 1.0;
    for (int k = 0; k + 1 < px; ++k) r.x(k + 1) = parse_number(f[x_cols[k]], line_no);
    r.z.resize(pz);
    for (int k = 0; k < pz; ++k) r.z(k) = parse_number(f[z_cols[k]], line_no);
    rows.push_back(std::move(r));
  }
  if (rows.empty()) throw DomainError("dataset CSV has no rows");
  RegressionDataset data(static_cast<int>(unit_names.size()), static_cast<int>(time_names.size()), px, pz);
  data.unit_ids = unit_names;
  data.time_ids = time_names;
  for (const auto& r : rows) data.add_row(r.unit, r.time, r.x, r.z, r.y);
  return data;
}

RegressionDataset read_dataset_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read_dataset_csv(in);
}

void write_dataset_csv(const RegressionDataset& data, std::ostream& out) {
  out << "unit_id,time_id,y";
  for (int k = 1; k < data.px(); ++k) out << ",x_" << k;
  for (int k = 1; k <= data.pz(); ++k) out << ",z_" << k;
  out << "\n" << std::setprecision(17);
  for (int t = 0; t < data.times(); ++t)
    for (int i = 0; i < data.units(); ++i) {
      const Cell& c = data.cell(i, t);
      for (Eigen::Index r = 0; r < c.y.size(); ++r) {
        out << data.unit_ids[i] << "," << data.time_ids[t] << "," << c.y(r);
        for (int k = 1; k < data.px(); ++k) out << "," << c.x(r, k);
        for (int k = 0; k < data.pz(); ++k) out << "," << c.z(r, k);
        out << "\n";
      }
    }
}

RegressionPriors RegressionPriors::defaults(int px, int pz) {
  RegressionPriors p;
  p.mu_beta = Eigen::VectorXd::Zero(px);
  if (px == 4) p.mu_beta << 1.46, 0.15, 0.24, 0.41;
  p.lambda_beta = 100.0 * Eigen::MatrixXd::Identity(px, px);
  p.mu_gamma = Eigen::VectorXd::Zero(pz);
  p.lambda_gamma = Eigen::MatrixXd::Identity(pz, pz);
  return p;
}

namespace {

void check_spd(const Eigen::MatrixXd& m, const char* what) {
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-10 * std::max(1.0, m.cwiseAbs().maxCoeff()))
    throw DomainError(std::string(what) + " must be symmetric");
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success) throw DomainError(std::string(what) + " must be positive definite");
}

Eigen::VectorXd vector_from_json(const nlohmann::json& j, int size, const char* what) {
  if (j.is_number()) return Eigen::VectorXd::Constant(size, j.get<double>());
  const auto v = j.get<std::vector<double>>();
  if (static_cast<int>(v.size()) != size)
    throw DomainError(std::string(what) + " needs " + std::to_string(size) + " entries");
  return Eigen::Map<const Eigen::VectorXd>(v.data(), size);
}

Eigen::MatrixXd precision_from_json(const nlohmann::json& j, int size, const char* what) {
  if (j.is_number()) return j.get<double>() * Eigen::MatrixXd::Identity(size, size);
  const auto rows = j.get<std::vector<std::vector<double>>>();
  if (static_cast<int>(rows.size()) != size) throw DomainError(std::string(what) + " has the wrong shape");
  Eigen::MatrixXd m(size, size);
  for (int r = 0; r < size; ++r) {
    if (static_cast<int>(rows[r].size()) != size) throw DomainError(std::string(what) + " has the wrong shape");
    for (int c = 0; c < size; ++c) m(r, c) = rows[r][c];
  }
  return m;
}

}  // namespace

void RegressionPriors::validate(int px, int pz) const {
  if (mu_beta.size() != px || lambda_beta.rows() != px || lambda_beta.cols() != px)
    throw DomainError("beta prior dimensions differ from the clustered covariates");
  if (mu_gamma.size() != pz || lambda_gamma.rows() != pz || lambda_gamma.cols() != pz)
    throw DomainError("gamma prior dimensions differ from the global covariates");
  check_spd(lambda_beta, "Lambda_beta");
  if (pz > 0) check_spd(lambda_gamma, "Lambda_gamma");
  if (!(a_tau > 0.0) || !(b_tau > 0.0)) throw DomainError("tau prior shape and rate must be positive");
}

RegressionPriors priors_from_json(const nlohmann::json& j, int px, int pz) {
  RegressionPriors p = RegressionPriors::defaults(px, pz);
  if (j.contains("mu_beta")) p.mu_beta = vector_from_json(j["mu_beta"], px, "mu_beta");
  if (j.contains("lambda_beta")) p.lambda_beta = precision_from_json(j["lambda_beta"], px, "lambda_beta");
  if (j.contains("mu_gamma")) p.mu_gamma = vector_from_json(j["mu_gamma"], pz, "mu_gamma");
  if (j.contains("lambda_gamma")) p.lambda_gamma = precision_from_json(j["lambda_gamma"], pz, "lambda_gamma");
  p.a_tau = j.value("a_tau", p.a_tau);
  p.b_tau = j.value("b_tau", p.b_tau);
  p.validate(px, pz);
  return p;
}

nlohmann::json priors_to_json(const RegressionPriors& p) {
  auto mat = [](const Eigen::MatrixXd& m) {
    std::vector<std::vector<double>> rows(m.rows(), std::vector<double>(m.cols()));
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c) rows[r][c] = m(r, c);
    return rows;
  };
  auto vec = [](const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
  return {{"mu_beta", vec(p.mu_beta)},     {"lambda_beta", mat(p.lambda_beta)}, {"mu_gamma", vec(p.mu_gamma)},
          {"lambda_gamma", mat(p.lambda_gamma)}, {"a_tau", p.a_tau},               {"b_tau", p.b_tau}};
}

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

double block_ssr(const CellStats& s, const Eigen::VectorXd& beta, const Eigen::VectorXd& gamma) {
  double ssr = s.yty - 2.0 * beta.dot(s.xty) + beta.dot(s.xtx * beta);
  if (gamma.size() > 0) ssr += -2.0 * gamma.dot(s.zty) + 2.0 * beta.dot(s.xtz * gamma) + gamma.dot(s.ztz * gamma);
  return std::max(ssr, 0.0);
}

void require_tau(double tau) {
  if (!(tau > 0.0) || !std::isfinite(tau)) throw DomainError("precision tau must be positive and finite");
}

}  // namespace

double block_log_likelihood(const CellStats& s, const Eigen::VectorXd& beta, const Eigen::VectorXd& gamma, double tau) {
  require_tau(tau);
  if (s.rows == 0) return 0.0;
  return 0.5 * s.rows * (std::log(tau) - kLog2Pi) - 0.5 * tau * block_ssr(s, beta, gamma);
}

double log_likelihood(const RegressionDataset& data, const Partition& p, const TimeParams& params, int t) {
  require_tau(params.tau);
  if (static_cast<int>(p.size()) != data.units()) throw DomainError("partition size differs from the unit count");
  if (static_cast<int>(params.beta.size()) != p.num_clusters())
    throw DomainError("need one coefficient vector per cluster");
  double total = 0.0;
  for (int i = 0; i < data.units(); ++i)
    total += block_log_likelihood(data.cell(i, t).stats, params.beta[p[i] - 1], params.gamma, params.tau);
  return total;
}

ResidualStats ResidualStats::of(const CellStats& s, const Eigen::VectorXd& gamma) {
  ResidualStats r;
  r.xtx = s.xtx;
  r.rows = s.rows;
  if (gamma.size() > 0) {
    r.xtr = s.xty - s.xtz * gamma;
    r.rtr = std::max(0.0, s.yty - 2.0 * gamma.dot(s.zty) + gamma.dot(s.ztz * gamma));
  } else {
    r.xtr = s.xty;
    r.rtr = s.yty;
  }
  return r;
}

void ResidualStats::add(const ResidualStats& o) {
  xtx += o.xtx;
  xtr += o.xtr;
  rtr += o.rtr;
  rows += o.rows;
}

void ResidualStats::remove(const ResidualStats& o) {
  xtx -= o.xtx;
  xtr -= o.xtr;
  rtr -= o.rtr;
  rows -= o.rows;
}

double marginal_log_likelihood(const ResidualStats& s, const RegressionPriors& priors, double tau) {
  require_tau(tau);
  if (s.rows == 0) return 0.0;
  const Eigen::MatrixXd post = priors.lambda_beta + tau * s.xtx;
  const Eigen::VectorXd b = priors.lambda_beta * priors.mu_beta + tau * s.xtr;
  Eigen::LLT<Eigen::MatrixXd> lp(post), l0(priors.lambda_beta);
  if (lp.info() != Eigen::Success || l0.info() != Eigen::Success)
    throw NumericalError("posterior precision of beta is not positive definite");
  auto half_logdet = [](const Eigen::LLT<Eigen::MatrixXd>& l) {
    return l.matrixLLT().diagonal().array().log().sum();
  };
  const Eigen::VectorXd w = lp.matrixL().solve(b);  // b' P^{-1} b = |L^{-1} b|^2
  return 0.5 * s.rows * (std::log(tau) - kLog2Pi) - 0.5 * tau * s.rtr + half_logdet(l0) - half_logdet(lp) -
         0.5 * priors.mu_beta.dot(priors.lambda_beta * priors.mu_beta) + 0.5 * w.squaredNorm();
}

double marginal_log_likelihood_cluster(const RegressionDataset& data, int t, const std::vector<int>& members,
                                       const RegressionPriors& priors, const Eigen::VectorXd& gamma, double tau) {
  ResidualStats s(data.px());
  for (int i : members) s.add(ResidualStats::of(data.cell(i, t).stats, gamma));
  return marginal_log_likelihood(s, priors, tau);
}

double standard_normal(Rng& rng) { return std::normal_distribution<double>(0.0, 1.0)(rng); }

double gamma_draw(double shape, double rate, Rng& rng) {
  return std::gamma_distribution<double>(shape, 1.0 / rate)(rng);
}

Eigen::VectorXd draw_normal_precision(const Eigen::MatrixXd& precision, const Eigen::VectorXd& b, Rng& rng) {
  Eigen::LLT<Eigen::MatrixXd> llt(precision);
  if (llt.info() != Eigen::Success) throw NumericalError("precision matrix is not positive definite");
  const Eigen::VectorXd mean = llt.solve(b);
  Eigen::VectorXd z(b.size());
  for (Eigen::Index k = 0; k < z.size(); ++k) z(k) = standard_normal(rng);
  // P = L L'; x = mean + L'^{-1} z has covariance P^{-1}.
  return mean + llt.matrixU().solve(z);
}

Eigen::VectorXd draw_beta(const ResidualStats& s, const RegressionPriors& priors, double tau, Rng& rng) {
  const Eigen::MatrixXd post = priors.lambda_beta + tau * s.xtx;
  const Eigen::VectorXd b = priors.lambda_beta * priors.mu_beta + tau * s.xtr;
  return draw_normal_precision(post, b, rng);
}

Eigen::VectorXd draw_prior_beta(const RegressionPriors& priors, Rng& rng) {
  return draw_normal_precision(priors.lambda_beta, priors.lambda_beta * priors.mu_beta, rng);
}

Eigen::VectorXd update_beta_star(const RegressionDataset& data, const Partition& p, const TimeParams& params, int t,
                                 int cluster, const RegressionPriors& priors, Rng& rng) {
  require_tau(params.tau);
  ResidualStats s(data.px());
  for (int i = 0; i < data.units(); ++i)
    if (p[i] == cluster) s.add(ResidualStats::of(data.cell(i, t).stats, params.gamma));
  return draw_beta(s, priors, params.tau, rng);
}

Eigen::VectorXd update_gamma(const RegressionDataset& data, const Partition& p, const TimeParams& params, int t,
                             const RegressionPriors& priors, Rng& rng) {
  require_tau(params.tau);
  const int pz = data.pz();
  if (pz == 0) return Eigen::VectorXd();
  Eigen::MatrixXd post = priors.lambda_gamma;
  Eigen::VectorXd b = priors.lambda_gamma * priors.mu_gamma;
  for (int i = 0; i < data.units(); ++i) {
    const auto& s = data.cell(i, t).stats;
    if (s.rows == 0) continue;
    post += params.tau * s.ztz;
    b += params.tau * (s.zty - s.xtz.transpose() * params.beta[p[i] - 1]);
  }
  return draw_normal_precision(post, b, rng);
}

double update_tau(const RegressionDataset& data, const Partition& p, const TimeParams& params, int t,
                  const RegressionPriors& priors, Rng& rng) {
  double ssr = 0.0;
  int m = 0;
  for (int i = 0; i < data.units(); ++i) {
    const auto& s = data.cell(i, t).stats;
    if (s.rows == 0) continue;
    ssr += block_ssr(s, params.beta[p[i] - 1], params.gamma);
    m += s.rows;
  }
  return gamma_draw(priors.a_tau + 0.5 * m, priors.b_tau + 0.5 * ssr, rng);
}

}  // namespace spd
