#include "spd/archive.hpp"

#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include "spd/config.hpp"
#include "spd/errors.hpp"

#ifndef SPD_VERSION
#define SPD_VERSION "0.0.0"
#endif
#ifndef SPD_GIT_DESCRIBE
#define SPD_GIT_DESCRIBE ""
#endif

namespace spd {

std::string version_string() {
  const std::string git = SPD_GIT_DESCRIBE;
  return git.empty() ? std::string(SPD_VERSION) : std::string(SPD_VERSION) + "+" + git;
}

namespace {

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream out(p);
  if (!out) throw std::runtime_error("cannot write '" + p.string() + "'");
  out << std::setprecision(17);
  return out;
}

void write_matrix(const std::filesystem::path& p, const Eigen::MatrixXd& m) {
  auto out = open_out(p);
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) out << (c ? "," : "") << m(r, c);
    out << '\n';
  }
}

}  // namespace

void write_archive(const std::filesystem::path& dir, const std::vector<ChainResult>& chains, const ModelSpec& model,
                   const nlohmann::json& manifest_extra, bool coefficients) {
  std::filesystem::create_directories(dir);
  auto parts = open_out(dir / "partitions.csv");
  auto perms = open_out(dir / "permutations.csv");
  auto scalars = open_out(dir / "scalars.csv");
  parts << "chain,iteration,time,labels\n";
  perms << "chain,iteration,time,order\n";
  scalars << "chain,iteration,omega,grit\n";
  const bool hier = model.kind == DependenceKind::kHierarchical;
  std::ofstream anchor, coef;
  if (hier) {
    anchor = open_out(dir / "anchor.csv");
    anchor << "chain,iteration,labels\n";
  }
  if (coefficients) {
    coef = open_out(dir / "coefficients.csv");
    coef << "chain,iteration,time,name,cluster,index,value\n";
  }
  for (std::size_t c = 0; c < chains.size(); ++c) {
    for (const auto& d : chains[c].draws) {
      for (std::size_t t = 0; t < d.partitions.size(); ++t) {
        parts << c << ',' << d.iteration << ',' << t + 1 << ",\"" << d.partitions[t].to_string() << "\"\n";
        perms << c << ',' << d.iteration << ',' << t + 1 << ",\"" << d.perms[t].to_string() << "\"\n";
        if (coefficients) {
          const auto& tp = d.regression[t];
          for (std::size_t k = 0; k < tp.beta.size(); ++k)
            for (Eigen::Index j = 0; j < tp.beta[k].size(); ++j)
              coef << c << ',' << d.iteration << ',' << t + 1 << ",beta," << k + 1 << ',' << j + 1 << ','
                   << tp.beta[k](j) << '\n';
          for (Eigen::Index j = 0; j < tp.gamma.size(); ++j)
            coef << c << ',' << d.iteration << ',' << t + 1 << ",gamma,0," << j + 1 << ',' << tp.gamma(j) << '\n';
          coef << c << ',' << d.iteration << ',' << t + 1 << ",tau,0,1," << tp.tau << '\n';
        }
      }
      scalars << c << ',' << d.iteration << ',' << d.omega << ',' << d.grit << '\n';
      if (hier) anchor << c << ',' << d.iteration << ",\"" << d.anchor.to_string() << "\"\n";
    }
  }

  nlohmann::json manifest = manifest_extra;
  manifest["version"] = version_string();
  manifest["model"] = model_to_json(model);
  for (const auto& ch : chains)
    manifest["chains"].push_back({{"seed", ch.seed}, {"draws", ch.draws.size()}, {"cpu_seconds", ch.cpu_seconds}});
  open_out(dir / "manifest.json") << manifest.dump(2) << '\n';

  const PosteriorSummary s = summarize(chains);
  open_out(dir / "summary.json") << summary_to_json(s).dump(2) << '\n';
  write_summary_tables(dir, s);
}

void write_summary_tables(const std::filesystem::path& dir, const PosteriorSummary& s) {
  std::filesystem::create_directories(dir);
  for (std::size_t t = 0; t < s.cocluster.size(); ++t)
    write_matrix(dir / ("cocluster_t" + std::to_string(t + 1) + ".csv"), s.cocluster[t]);
  write_matrix(dir / "ari.csv", s.ari);
  auto pe = open_out(dir / "point_estimates.csv");
  pe << "time,labels\n";
  for (std::size_t t = 0; t < s.point_estimates.size(); ++t)
    pe << t + 1 << ",\"" << s.point_estimates[t].to_string() << "\"\n";
}

std::vector<std::vector<Partition>> read_archive_partitions(const std::filesystem::path& dir) {
  std::ifstream in(dir / "partitions.csv");
  if (!in) throw DomainError("no partitions.csv in '" + dir.string() + "'");
  std::string line;
  std::getline(in, line);
  if (line != "chain,iteration,time,labels") throw DomainError("unexpected partitions.csv header");
  // Draws keyed by (chain, iteration) in first-seen order.
  std::vector<std::vector<Partition>> draws;
  std::map<std::pair<long, long>, std::size_t> index;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string chain, iter, time;
    if (!std::getline(row, chain, ',') || !std::getline(row, iter, ',') || !std::getline(row, time, ','))
      throw DomainError("malformed partitions.csv row: " + line);
    std::string labels;
    std::getline(row, labels);
    if (labels.size() >= 2 && labels.front() == '"' && labels.back() == '"') labels = labels.substr(1, labels.size() - 2);
    const auto key = std::make_pair(std::stol(chain), std::stol(iter));
    auto [it, fresh] = index.try_emplace(key, draws.size());
    if (fresh) draws.emplace_back();
    const auto t = static_cast<std::size_t>(std::stol(time));
    auto& d = draws[it->second];
    if (d.size() < t) d.resize(t);
    d[t - 1] = Partition::parse(labels);
  }
  return draws;
}

}  // namespace spd
