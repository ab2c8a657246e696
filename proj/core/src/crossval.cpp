#include "spd/crossval.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <numeric>

#include "spd/errors.hpp"
#include "spd/stats.hpp"

namespace spd {

std::vector<int> fold_assignment(std::size_t rows, int folds, std::uint64_t seed) {
  if (folds < 2) throw DomainError("cross-validation needs at least 2 folds");
  if (static_cast<std::size_t>(folds) > rows) throw DomainError("more folds than observations");
  std::vector<std::size_t> order(rows);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  for (std::size_t k = rows; k > 1; --k) {
    const auto j = std::min(k - 1, static_cast<std::size_t>(uniform01(rng) * static_cast<double>(k)));
    std::swap(order[k - 1], order[j]);
  }
  std::vector<int> fold(rows);
  for (std::size_t k = 0; k < rows; ++k) fold[order[k]] = static_cast<int>(k % static_cast<std::size_t>(folds));
  return fold;
}

DatasetSplit split_fold(const RegressionDataset& data, const std::vector<int>& assignment, int fold) {
  if (assignment.size() != data.total_rows()) throw DomainError("fold assignment does not match the dataset");
  DatasetSplit s{RegressionDataset(data.units(), data.times(), data.px(), data.pz()),
                 RegressionDataset(data.units(), data.times(), data.px(), data.pz())};
  s.train.unit_ids = s.test.unit_ids = data.unit_ids;
  s.train.time_ids = s.test.time_ids = data.time_ids;
  std::size_t row = 0;
  for (int t = 0; t < data.times(); ++t)
    for (int i = 0; i < data.units(); ++i) {
      const Cell& c = data.cell(i, t);
      for (Eigen::Index r = 0; r < c.y.size(); ++r, ++row) {
        const Eigen::VectorXd x = c.x.row(r).transpose();
        const Eigen::VectorXd z = c.z.row(r).transpose();
        (assignment[row] == fold ? s.test : s.train).add_row(i, t, x, z, c.y(r));
      }
    }
  return s;
}

FoldScore score_fold(const RegressionDataset& test, const std::vector<ChainResult>& chains) {
  FoldScore f;
  f.held_out_rows = test.total_rows();
  std::size_t total = 0;
  for (const auto& c : chains) total += c.draws.size();
  if (total == 0) throw DomainError("no retained draws to score");
  double sum = 0.0, var = 0.0;
  for (const auto& c : chains) {
    std::vector<double> ll;
    ll.reserve(c.draws.size());
    for (const auto& d : c.draws) ll.push_back(draw_log_likelihood(test, d));
    sum += std::accumulate(ll.begin(), ll.end(), 0.0);
    const double w = static_cast<double>(ll.size()) / static_cast<double>(total);
    const double se = obm_standard_error(ll);
    var += w * w * se * se;
    f.cpu_seconds += c.cpu_seconds;
  }
  f.estimate = sum / static_cast<double>(total);
  f.standard_error = std::sqrt(var);
  return f;
}

CrossValResult cross_validate(const RegressionDataset& data, const ModelSpec& model, const McmcConfig& config,
                              const RegressionPriors& priors, int folds, std::uint64_t fold_seed) {
  model.validate(data.units(), data.times());
  config.validate();
  const auto assignment = fold_assignment(data.total_rows(), folds, fold_seed);
  std::vector<std::future<FoldScore>> jobs;
  for (int f = 0; f < folds; ++f)
    jobs.push_back(std::async(std::launch::async, [&, f] {
      const auto split = split_fold(data, assignment, f);
      McmcConfig c = config;
      c.seed = split_seed(config.seed, 1000 + static_cast<std::uint64_t>(f));
      FoldScore s = score_fold(split.test, run_chains(split.train, model, c, priors));
      s.fold = f;
      return s;
    }));
  CrossValResult r;
  double var = 0.0;
  for (auto& j : jobs) {
    r.folds.push_back(j.get());
    r.estimate += r.folds.back().estimate;
    var += r.folds.back().standard_error * r.folds.back().standard_error;
    r.cpu_seconds += r.folds.back().cpu_seconds;
  }
  r.margin = 1.959963984540054 * std::sqrt(var);
  return r;
}

}  // namespace spd
