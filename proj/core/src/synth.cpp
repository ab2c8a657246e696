#include "spd/synth.hpp"

#include <nlohmann/json.hpp>

#include "spd/errors.hpp"

namespace spd {

void SynthSpec::validate() const {
  if (units < 1 || times < 1) throw DomainError("synthetic panel needs at least one unit and one time point");
  if (rows_per_cell < 0) throw DomainError("rows per cell must be nonnegative");
  if (px < 1 || pz < 0) throw DomainError("need px >= 1 (intercept) and pz >= 0");
  if (!(tau > 0.0)) throw DomainError("noise precision must be positive");
  if (!(beta_spread >= 0.0) || !(slope_spread >= 0.0)) throw DomainError("coefficient spreads must be nonnegative");
  if (!(drift >= 0.0 && drift <= 1.0)) throw DomainError("drift must be a probability");
  if (beta_center.size() != 0 && beta_center.size() != px) throw DomainError("beta_center needs px entries");
  if (gamma.size() != 0 && gamma.size() != pz) throw DomainError("gamma needs pz entries");
  if (partitions.empty()) {
    if (groups < 1) throw DomainError("need at least one group");
  } else {
    if (static_cast<int>(partitions.size()) != times) throw DomainError("explicit truth needs one partition per time");
    for (const auto& p : partitions)
      if (static_cast<int>(p.size()) != units) throw DomainError("explicit truth partition has the wrong size");
  }
}

SynthResult generate_synthetic(const SynthSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  const int n = spec.units, T = spec.times;
  SynthTruth truth;
  truth.tau = spec.tau;
  truth.gamma = spec.gamma.size() ? spec.gamma : Eigen::VectorXd::Constant(spec.pz, 0.5);

  truth.groups.assign(T, std::vector<int>(n));
  int n_groups = spec.groups;
  if (!spec.partitions.empty()) {
    n_groups = 0;
    for (int t = 0; t < T; ++t)
      for (int i = 0; i < n; ++i) {
        truth.groups[t][i] = spec.partitions[t][i];
        n_groups = std::max(n_groups, truth.groups[t][i]);
      }
  } else {
    for (int i = 0; i < n; ++i) truth.groups[0][i] = 1 + i % n_groups;
    for (int t = 1; t < T; ++t)
      for (int i = 0; i < n; ++i) {
        int g = truth.groups[t - 1][i];
        if (n_groups > 1 && uniform01(rng) < spec.drift) {
          const int shift = 1 + static_cast<int>(uniform01(rng) * (n_groups - 1));
          g = 1 + (g - 1 + std::min(shift, n_groups - 1)) % n_groups;
        }
        truth.groups[t][i] = g;
      }
  }
  for (int t = 0; t < T; ++t) truth.partitions.push_back(canonicalize(truth.groups[t]));

  const Eigen::VectorXd center = spec.beta_center.size() ? spec.beta_center : Eigen::VectorXd::Zero(spec.px);
  for (int g = 0; g < n_groups; ++g) {
    Eigen::VectorXd b = center;
    b(0) += spec.beta_spread * (g - 0.5 * (n_groups - 1));
    for (int j = 1; j < spec.px; ++j) b(j) += spec.slope_spread * standard_normal(rng);
    truth.group_beta.push_back(b);
  }

  RegressionDataset data(n, T, spec.px, spec.pz);
  const double sd = 1.0 / std::sqrt(spec.tau);
  for (int t = 0; t < T; ++t)
    for (int i = 0; i < n; ++i)
      for (int r = 0; r < spec.rows_per_cell; ++r) {
        Eigen::VectorXd x = Eigen::VectorXd::Zero(spec.px), z(spec.pz);
        x(0) = 1.0;
        const int level = static_cast<int>(uniform01(rng) * spec.px);  // 0 = reference level
        if (level > 0 && level < spec.px) x(level) = 1.0;
        for (int j = 0; j < spec.pz; ++j) z(j) = standard_normal(rng);
        double y = x.dot(truth.group_beta[truth.groups[t][i] - 1]) + sd * standard_normal(rng);
        if (spec.pz > 0) y += z.dot(truth.gamma);
        data.add_row(i, t, x, z, y);
      }
  return {std::move(data), std::move(truth)};
}

namespace {

Eigen::VectorXd vector_field(const nlohmann::json& j, const char* key) {
  if (!j.contains(key)) return {};
  const auto v = j.at(key).get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

SynthSpec synth_spec_from_json(const nlohmann::json& j) {
  SynthSpec s;
  try {
    s.units = j.value("units", s.units);
    s.times = j.value("times", s.times);
    s.rows_per_cell = j.value("rows_per_cell", s.rows_per_cell);
    s.px = j.value("px", s.px);
    s.pz = j.value("pz", s.pz);
    s.groups = j.value("groups", s.groups);
    s.drift = j.value("drift", s.drift);
    s.tau = j.value("tau", s.tau);
    s.beta_spread = j.value("beta_spread", s.beta_spread);
    s.slope_spread = j.value("slope_spread", s.slope_spread);
    s.beta_center = vector_field(j, "beta_center");
    s.gamma = vector_field(j, "gamma");
    s.seed = j.value("seed", s.seed);
    if (j.contains("partitions"))
      for (const auto& p : j.at("partitions")) s.partitions.push_back(Partition::parse(p.get<std::string>()));
  } catch (const nlohmann::json::exception& e) {
    throw DomainError(std::string("synth config: ") + e.what());
  }
  s.validate();
  return s;
}

nlohmann::json truth_to_json(const SynthTruth& truth) {
  nlohmann::json j;
  for (const auto& p : truth.partitions) j["partitions"].push_back(p.to_string());
  j["groups"] = truth.groups;
  for (const auto& b : truth.group_beta) j["group_beta"].push_back(std::vector<double>(b.data(), b.data() + b.size()));
  j["gamma"] = std::vector<double>(truth.gamma.data(), truth.gamma.data() + truth.gamma.size());
  j["tau"] = truth.tau;
  return j;
}

}  // namespace spd
