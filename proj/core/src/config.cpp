#include "spd/config.hpp"

#include <fstream>

#include "spd/errors.hpp"

namespace spd {

DependenceKind dependence_from_string(const std::string& s) {
  if (s == "independent") return DependenceKind::kIndependent;
  if (s == "hierarchical") return DependenceKind::kHierarchical;
  if (s == "temporal") return DependenceKind::kTemporal;
  throw DomainError("unknown model kind '" + s + "'");
}

PriorFamily family_from_string(const std::string& s) {
  if (s == "sp") return PriorFamily::kSp;
  if (s == "cpp") return PriorFamily::kCpp;
  if (s == "lsp") return PriorFamily::kLsp;
  if (s == "fixed") return PriorFamily::kFixed;
  if (s == "baseline") return PriorFamily::kBaseline;
  throw DomainError("unknown prior family '" + s + "'");
}

namespace {

PartitionDistance distance_from_string(const std::string& s) {
  if (s == "vi") return PartitionDistance::kVariationOfInformation;
  if (s == "binder") return PartitionDistance::kBinder;
  throw DomainError("unknown partition distance '" + s + "'");
}

LabelUpdate label_update_from_string(const std::string& s) {
  if (s == "collapsed") return LabelUpdate::kCollapsed;
  if (s == "neal8") return LabelUpdate::kNeal8;
  throw DomainError("unknown label update '" + s + "'");
}

template <class F>
auto guarded(const char* section, F&& f) {
  try {
    return f();
  } catch (const nlohmann::json::exception& e) {
    throw DomainError(std::string(section) + ": " + e.what());
  }
}

const nlohmann::json& section(const nlohmann::json& j, const char* key) {
  static const nlohmann::json empty = nlohmann::json::object();
  if (!j.contains(key)) return empty;
  if (!j.at(key).is_object()) throw DomainError(std::string("config section '") + key + "' must be an object");
  return j.at(key);
}

McmcConfig mcmc_from_json(const nlohmann::json& j, DependenceKind kind) {
  McmcConfig c = McmcConfig::defaults_for(kind);
  return guarded("mcmc", [&] {
    c.iterations = j.value("iterations", c.iterations);
    c.burn_in = j.value("burn_in", c.burn_in);
    c.thin = j.value("thin", c.thin);
    c.perm_attempts = j.value("perm_attempts", c.perm_attempts);
    c.perm_block = j.value("perm_block", c.perm_block);
    const auto& op = section(j, "omega_prior");
    c.omega_shape = op.value("shape", c.omega_shape);
    c.omega_rate = op.value("rate", c.omega_rate);
    const auto& gp = section(j, "grit_prior");
    c.grit_a = gp.value("a", c.grit_a);
    c.grit_b = gp.value("b", c.grit_b);
    c.omega_step = j.value("omega_step", c.omega_step);
    c.grit_step = j.value("grit_step", c.grit_step);
    c.seed = j.value("seed", c.seed);
    c.chains = j.value("chains", c.chains);
    if (j.contains("label_update")) c.label_update = label_update_from_string(j.at("label_update").get<std::string>());
    c.validate();
    return c;
  });
}

// Model fields that do not depend on the data; baselines are re-read in
// bind_to_data once n is known.
ModelSpec model_from_json(const nlohmann::json& j, std::size_t n) {
  ModelSpec m;
  return guarded("model", [&] {
    m.kind = dependence_from_string(j.value("kind", std::string("independent")));
    m.family = family_from_string(j.value("family", std::string("sp")));
    if (m.kind != DependenceKind::kIndependent) {
      // Dependent models put gamma(5, 1) and beta(1, 9) priors on omega and psi.
      m.sample_omega = m.sample_grit = true;
      m.omega = 5.0;
      m.grit = 0.1;
    }
    const std::size_t nb = n ? n : 1;
    if (j.contains("baseline")) m.baseline = baseline_from_json(j.at("baseline"), nb);
    if (j.contains("anchor_prior")) m.anchor_prior = baseline_from_json(j.at("anchor_prior"), nb);
    if (j.contains("initial")) m.initial = baseline_from_json(j.at("initial"), nb);
    if (j.contains("anchor")) m.anchor = Partition::parse(j.at("anchor").get<std::string>());
    m.spacing = j.value("spacing", m.spacing);
    m.shrinkage_weights = j.value("shrinkage_weights", m.shrinkage_weights);
    if (j.contains("cpp_distance")) m.cpp_distance = distance_from_string(j.at("cpp_distance").get<std::string>());
    m.omega = j.value("omega", m.omega);
    m.grit = j.value("grit", m.grit);
    m.sample_omega = j.value("sample_omega", m.sample_omega);
    m.sample_grit = j.value("sample_grit", m.sample_grit);
    return m;
  });
}

}  // namespace

RunConfig config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw DomainError("config must be an object");
  RunConfig c;
  c.raw = j;
  c.model = model_from_json(section(j, "model"), 0);
  c.mcmc = mcmc_from_json(section(j, "mcmc"), c.model.kind);
  guarded("config", [&] {
    c.data_path = j.value("data", c.data_path);
    c.output_dir = j.value("output", c.output_dir);
    const auto& cv = section(j, "crossval");
    c.folds = cv.value("folds", c.folds);
    c.fold_seed = cv.value("seed", c.fold_seed);
    if (j.contains("priors")) {
      c.priors_json = section(j, "priors");
      c.priors_set = true;
    }
    if (j.contains("distribution")) c.distribution_json = section(j, "distribution");
    c.sample_count = section(j, "sample").value("count", c.sample_count);
    c.verify_seed = section(j, "verify").value("seed", c.verify_seed);
    return 0;
  });
  c.synth = synth_spec_from_json(section(j, "synth"));
  if (c.folds < 2) throw DomainError("cross-validation needs at least 2 folds");
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open config '" + path + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw DomainError("config '" + path + "': " + e.what());
  }
  return config_from_json(j);
}

void bind_to_data(RunConfig& c, int units, int times, int px, int pz) {
  // Uniform baselines read before the data was known get the unit count.
  const auto& mj = section(c.raw, "model");
  auto resize = [&](BaselineSpec& b, const char* key) {
    auto* u = std::get_if<UniformPartition>(&b);
    if (u && !(mj.contains(key) && mj.at(key).contains("n"))) u->n = units;
  };
  resize(c.model.baseline, "baseline");
  resize(c.model.anchor_prior, "anchor_prior");
  resize(c.model.initial, "initial");
  if (c.model.kind == DependenceKind::kIndependent && c.model.family != PriorFamily::kBaseline &&
      c.model.anchor.labels().empty())
    throw DomainError("independent " + to_string(c.model.family) + " model needs an anchor partition");
  c.model.validate(units, times);
  c.priors = c.priors_set ? priors_from_json(c.priors_json, px, pz) : RegressionPriors::defaults(px, pz);
}

std::size_t DistributionSpec::size() const {
  switch (family) {
    case PriorFamily::kCpp: return cpp.anchor.size();
    case PriorFamily::kLsp: return lsp.anchor.size();
    case PriorFamily::kBaseline:
      if (const auto* u = std::get_if<UniformPartition>(&baseline)) return static_cast<std::size_t>(u->n);
      if (const auto* f = std::get_if<FixedPartition>(&baseline)) return f->target.size();
      return sp.anchor.size();
    default: return sp.anchor.size();
  }
}

DistributionSpec DistributionSpec::with_omega(double omega) const {
  DistributionSpec d = *this;
  d.cpp.shrinkage = omega;
  d.lsp.shrinkage = omega;
  for (std::size_t i = 0; i < d.sp.shrinkage.size(); ++i) d.sp.shrinkage[i] = omega * (weights.empty() ? 1.0 : weights[i]);
  return d;
}

DistributionSpec distribution_from_json(const nlohmann::json& j) {
  return guarded("distribution", [&] {
    DistributionSpec d;
    d.family = family_from_string(j.value("family", std::string("sp")));
    if (d.family == PriorFamily::kFixed) throw DomainError("use a baseline with family 'fixed' for point masses");
    std::size_t n = 0;
    Partition anchor;
    if (j.contains("anchor")) {
      anchor = Partition::parse(j.at("anchor").get<std::string>());
      n = anchor.size();
    } else {
      n = j.value("n", std::size_t{0});
    }
    if (n == 0) throw DomainError("distribution needs an 'anchor' or an item count 'n'");
    if (anchor.labels().empty()) anchor = Partition::single_cluster(n);
    const BaselineSpec base = j.contains("baseline") ? baseline_from_json(j.at("baseline"), n) : BaselineSpec{ewens(1.0)};
    const double omega = j.value("omega", 0.0);
    d.weights = j.value("shrinkage_weights", std::vector<double>{});
    if (!d.weights.empty() && d.weights.size() != n) throw DomainError("shrinkage_weights needs one entry per item");
    d.sp = SpParams{anchor, std::vector<double>(n, omega), j.value("grit", 0.0), base};
    d.cpp = CppParams{anchor, omega, PartitionDistance::kVariationOfInformation, base};
    if (j.contains("cpp_distance")) d.cpp.distance = distance_from_string(j.at("cpp_distance").get<std::string>());
    d.lsp = LspParams{anchor, omega};
    d.baseline = base;
    if (j.contains("permutation")) d.permutation = Permutation::parse(j.at("permutation").get<std::string>());
    if (d.permutation && d.permutation->size() != n) throw DomainError("permutation size differs from the anchor");
    d.omega_grid = j.value("omega_grid", std::vector<double>{});
    d = d.with_omega(omega);
    d.sp.validate();
    return d;
  });
}

nlohmann::json model_to_json(const ModelSpec& m) {
  nlohmann::json j{{"kind", to_string(m.kind)},
                   {"family", to_string(m.family)},
                   {"baseline", baseline_to_json(m.baseline)},
                   {"omega", m.omega},
                   {"grit", m.grit},
                   {"sample_omega", m.sample_omega},
                   {"sample_grit", m.sample_grit},
                   {"cpp_distance", m.cpp_distance == PartitionDistance::kBinder ? "binder" : "vi"}};
  if (!m.anchor.labels().empty()) j["anchor"] = m.anchor.to_string();
  if (m.kind == DependenceKind::kHierarchical) j["anchor_prior"] = baseline_to_json(m.anchor_prior);
  if (m.kind == DependenceKind::kTemporal) j["initial"] = baseline_to_json(m.initial);
  if (!m.spacing.empty()) j["spacing"] = m.spacing;
  if (!m.shrinkage_weights.empty()) j["shrinkage_weights"] = m.shrinkage_weights;
  return j;
}

nlohmann::json mcmc_to_json(const McmcConfig& c) {
  return {{"iterations", c.iterations},
          {"burn_in", c.burn_in},
          {"thin", c.thin},
          {"perm_attempts", c.perm_attempts},
          {"perm_block", c.perm_block},
          {"omega_prior", {{"shape", c.omega_shape}, {"rate", c.omega_rate}}},
          {"grit_prior", {{"a", c.grit_a}, {"b", c.grit_b}}},
          {"omega_step", c.omega_step},
          {"grit_step", c.grit_step},
          {"label_update", c.label_update == LabelUpdate::kNeal8 ? "neal8" : "collapsed"},
          {"seed", c.seed},
          {"chains", c.chains}};
}

}  // namespace spd
