#include "spd/summary.hpp"

#include <nlohmann/json.hpp>

#include "spd/errors.hpp"

namespace spd {

Eigen::MatrixXd coclustering(const std::vector<Partition>& samples) {
  if (samples.empty()) throw DomainError("no samples to summarize");
  const auto n = static_cast<Eigen::Index>(samples.front().size());
  Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(n, n);
  for (const auto& p : samples) {
    if (static_cast<Eigen::Index>(p.size()) != n) throw DomainError("samples differ in size");
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j)
        if (p[i] == p[j]) counts(i, j) += 1.0;
  }
  return counts / static_cast<double>(samples.size());
}

double expected_binder_loss(const Partition& p, const Eigen::MatrixXd& cocluster) {
  double loss = 0.0;
  const auto n = static_cast<Eigen::Index>(p.size());
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) loss += std::abs((p[i] == p[j] ? 1.0 : 0.0) - cocluster(i, j));
  return loss;
}

Partition point_estimate(const std::vector<Partition>& samples) {
  const Eigen::MatrixXd c = coclustering(samples);
  const Partition* best = &samples.front();
  double best_loss = expected_binder_loss(*best, c);
  for (const auto& p : samples) {
    if (p == *best) continue;
    const double l = expected_binder_loss(p, c);
    if (l < best_loss) {
      best_loss = l;
      best = &p;
    }
  }
  return *best;
}

Eigen::MatrixXd ari_matrix(const std::vector<std::vector<Partition>>& draws) {
  if (draws.empty()) throw DomainError("no samples to summarize");
  const auto T = static_cast<Eigen::Index>(draws.front().size());
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(T, T);
  for (const auto& d : draws)
    for (Eigen::Index s = 0; s < T; ++s)
      for (Eigen::Index t = s; t < T; ++t) m(s, t) += adjusted_rand_index(d[s], d[t]);
  m /= static_cast<double>(draws.size());
  for (Eigen::Index s = 0; s < T; ++s)
    for (Eigen::Index t = 0; t < s; ++t) m(s, t) = m(t, s);
  return m;
}

std::vector<double> lagged_ari(const std::vector<std::vector<Partition>>& draws, int lag) {
  std::vector<double> out;
  out.reserve(draws.size());
  for (const auto& d : draws) {
    const int T = static_cast<int>(d.size());
    if (lag < 1 || lag >= T) throw DomainError("lag must be in [1, T)");
    double total = 0.0;
    for (int t = 0; t + lag < T; ++t) total += adjusted_rand_index(d[t], d[t + lag]);
    out.push_back(total / (T - lag));
  }
  return out;
}

PosteriorSummary summarize(const std::vector<std::vector<Partition>>& partitions_by_draw) {
  if (partitions_by_draw.empty()) throw DomainError("no samples to summarize");
  PosteriorSummary s;
  s.draws = partitions_by_draw.size();
  const std::size_t T = partitions_by_draw.front().size();
  for (std::size_t t = 0; t < T; ++t) {
    std::vector<Partition> at_t;
    at_t.reserve(s.draws);
    for (const auto& d : partitions_by_draw) at_t.push_back(d[t]);
    s.cocluster.push_back(coclustering(at_t));
    s.point_estimates.push_back(point_estimate(at_t));
  }
  s.ari = ari_matrix(partitions_by_draw);
  return s;
}

PosteriorSummary summarize(const std::vector<ChainResult>& chains) {
  std::vector<std::vector<Partition>> parts;
  double omega = 0.0, grit = 0.0;
  AcceptanceStats acc;
  double cpu = 0.0;
  for (const auto& c : chains) {
    for (const auto& d : c.draws) {
      parts.push_back(d.partitions);
      omega += d.omega;
      grit += d.grit;
    }
    acc.add(c.acceptance);
    cpu += c.cpu_seconds;
  }
  PosteriorSummary s = summarize(parts);
  s.omega_mean = omega / static_cast<double>(parts.size());
  s.grit_mean = grit / static_cast<double>(parts.size());
  s.acceptance = acc;
  s.cpu_seconds = cpu;
  return s;
}

nlohmann::json summary_to_json(const PosteriorSummary& s) {
  nlohmann::json j;
  j["draws"] = s.draws;
  for (const auto& p : s.point_estimates) j["point_estimates"].push_back(p.to_string());
  j["omega_mean"] = s.omega_mean;
  j["grit_mean"] = s.grit_mean;
  j["cpu_seconds"] = s.cpu_seconds;
  const auto& a = s.acceptance;
  j["acceptance"] = {{"permutation", AcceptanceStats::rate(a.perm_accepted, a.perm_proposed)},
                     {"omega", AcceptanceStats::rate(a.omega_accepted, a.omega_proposed)},
                     {"grit", AcceptanceStats::rate(a.grit_accepted, a.grit_proposed)},
                     {"anchor", AcceptanceStats::rate(a.anchor_accepted, a.anchor_proposed)}};
  const auto T = s.ari.rows();
  for (Eigen::Index r = 0; r < T; ++r) {
    std::vector<double> row(static_cast<std::size_t>(T));
    for (Eigen::Index c = 0; c < T; ++c) row[c] = s.ari(r, c);
    j["ari"].push_back(row);
  }
  return j;
}

}  // namespace spd
