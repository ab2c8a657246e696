#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "spd/archive.hpp"
#include "spd/config.hpp"
#include "spd/crossval.hpp"
#include "spd/errors.hpp"
#include "spd/oracle.hpp"
#include "spd/reference.hpp"
#include "spd/summary.hpp"
#include "spd/synth.hpp"

namespace fs = std::filesystem;
using namespace spd;

namespace {

constexpr int kValidation = 1;
constexpr int kRuntime = 2;
constexpr int kVerification = 3;

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> chains;
  std::optional<std::string> out;
  std::optional<int> folds;
  std::string theorem;
  bool anchor_mass = false;
};

RunConfig load(const Options& o) {
  RunConfig c = o.config.empty() ? config_from_json(nlohmann::json::object()) : load_config(o.config);
  if (o.seed) c.mcmc.seed = *o.seed;
  if (o.chains) c.mcmc.chains = *o.chains;
  if (o.out) c.output_dir = *o.out;
  if (o.folds) c.folds = *o.folds;
  c.mcmc.validate();
  return c;
}

int cmd_verify(const Options& o) {
  RunConfig c = load(o);
  const auto reports = run_theorem_suite(default_theorem_suite(o.seed.value_or(c.verify_seed)), o.theorem);
  if (reports.empty()) throw DomainError("no theorem check matches '" + o.theorem + "'");
  bool ok = true;
  for (const auto& r : reports) {
    std::cout << format_report(r) << '\n';
    ok = ok && r.pass;
  }
  return ok ? 0 : kVerification;
}

DistributionSpec load_distribution(const RunConfig& c) {
  if (!c.distribution_json) throw DomainError("config has no 'distribution' section");
  return distribution_from_json(*c.distribution_json);
}

// Exact pmf over all partitions of n items.
std::vector<PartitionMass> pmf_table(const DistributionSpec& d) {
  const std::size_t n = d.size();
  switch (d.family) {
    case PriorFamily::kCpp: {
      std::vector<PartitionMass> out;
      const double z = cpp_log_normalizer(d.cpp);
      for_each_partition(n, [&](const Partition& p) {
        const double lp = cpp_log_unnormalized(d.cpp, p) - z;
        out.push_back({p, lp, std::exp(lp)});
      });
      return out;
    }
    case PriorFamily::kLsp: {
      if (n > kOracleFixedCap) throw CapacityError("pmf tables are limited to n <= 8");
      std::vector<PartitionMass> out;
      for_each_partition(n, [&](const Partition& p) {
        const double lp = d.permutation ? lsp_log_pmf(d.lsp, p, *d.permutation)
                                        : lsp_marginal_log_pmf(d.lsp, p, ExactMarginal{});
        out.push_back({p, lp, std::exp(lp)});
      });
      return out;
    }
    default: {
      SpParams sp = d.sp;
      if (d.family == PriorFamily::kBaseline) {
        sp = SpParams::common(Partition::single_cluster(n), 0.0, 0.0, d.baseline);
      }
      if (d.permutation) return exact_distribution(sp, FixedPermutation{*d.permutation});
      return exact_distribution(sp, PermutationMarginal{});
    }
  }
}

int cmd_pmf(const Options& o) {
  const RunConfig c = load(o);
  const DistributionSpec base = load_distribution(c);
  std::vector<double> grid = base.omega_grid;
  if (grid.empty()) grid.push_back(base.family == PriorFamily::kCpp ? base.cpp.shrinkage : base.lsp.shrinkage);
  std::cout << std::setprecision(12);
  std::cout << (o.anchor_mass ? "omega,anchor_probability\n" : "omega,partition,probability,log_probability\n");
  for (double w : grid) {
    const auto table = pmf_table(base.with_omega(w));
    if (o.anchor_mass) {
      std::cout << w << ',' << mass_of(table, base.sp.anchor) << '\n';
      continue;
    }
    for (const auto& m : table)
      std::cout << w << ",\"" << m.partition.to_string() << "\"," << m.probability << ',' << m.log_probability << '\n';
  }
  return 0;
}

int cmd_sample(const Options& o) {
  const RunConfig c = load(o);
  const DistributionSpec d = load_distribution(c);
  const std::size_t n = d.size();
  Rng rng(c.mcmc.seed);
  if (c.sample_count == 0) return 0;
  std::vector<PartitionMass> cpp_table;
  std::vector<double> cpp_logs;
  if (d.family == PriorFamily::kCpp) {
    cpp_table = pmf_table(d);
    for (const auto& m : cpp_table) cpp_logs.push_back(m.log_probability);
  }
  std::cout << "draw,labels\n";
  for (std::size_t k = 0; k < c.sample_count; ++k) {
    const Permutation perm = d.permutation ? *d.permutation : Permutation::random(n, rng);
    Partition p;
    switch (d.family) {
      case PriorFamily::kCpp: p = cpp_table[sample_log_weights(cpp_logs, rng)].partition; break;
      case PriorFamily::kLsp: p = lsp_sample(d.lsp, perm, rng); break;
      case PriorFamily::kBaseline:
        p = sp_sample(SpParams::common(Partition::single_cluster(n), 0.0, 0.0, d.baseline), perm, rng);
        break;
      default: p = sp_sample(d.sp, perm, rng);
    }
    std::cout << k + 1 << ",\"" << p.to_string() << "\"\n";
  }
  return 0;
}

int cmd_synth(const Options& o) {
  RunConfig c = load(o);
  if (o.seed) c.synth.seed = *o.seed;
  const auto r = generate_synthetic(c.synth);
  const fs::path dir = c.output_dir;
  fs::create_directories(dir);
  std::ofstream data(dir / "data.csv");
  write_dataset_csv(r.data, data);
  std::ofstream(dir / "truth.json") << truth_to_json(r.truth).dump(2) << '\n';
  if (!data) throw std::runtime_error("cannot write " + (dir / "data.csv").string());
  std::cout << "wrote " << (dir / "data.csv").string() << " (" << r.data.total_rows() << " rows) and "
            << (dir / "truth.json").string() << '\n';
  return 0;
}

RegressionDataset load_data(RunConfig& c) {
  if (c.data_path.empty()) throw DomainError("config has no 'data' path");
  if (!fs::exists(c.data_path)) throw DomainError("data file '" + c.data_path + "' does not exist");
  auto data = read_dataset_csv(c.data_path);
  bind_to_data(c, data.units(), data.times(), data.px(), data.pz());
  return data;
}

int cmd_fit(const Options& o, bool crossval) {
  RunConfig c = load(o);
  const auto data = load_data(c);
  const fs::path dir = c.output_dir;
  if (crossval || o.folds) {
    const auto r = cross_validate(data, c.model, c.mcmc, c.priors, c.folds, c.fold_seed);
    nlohmann::json j{{"model", model_to_json(c.model)},
                     {"folds", c.folds},
                     {"out_of_sample_log_likelihood", r.estimate},
                     {"margin_95", r.margin},
                     {"cpu_seconds", r.cpu_seconds},
                     {"version", version_string()}};
    for (const auto& f : r.folds)
      j["per_fold"].push_back({{"fold", f.fold},
                               {"held_out_rows", f.held_out_rows},
                               {"estimate", f.estimate},
                               {"standard_error", f.standard_error},
                               {"cpu_seconds", f.cpu_seconds}});
    fs::create_directories(dir);
    std::ofstream(dir / "crossval.json") << j.dump(2) << '\n';
    std::cout << j.dump(2) << '\n';
    return 0;
  }
  const auto chains = run_chains(data, c.model, c.mcmc, c.priors);
  nlohmann::json extra{{"command", "fit"}, {"config", c.raw}, {"mcmc", mcmc_to_json(c.mcmc)}, {"data", c.data_path}};
  write_archive(dir, chains, c.model, extra);
  auto j = summary_to_json(summarize(chains));
  j["archive"] = dir.string();
  std::cout << j.dump(2) << '\n';
  return 0;
}

int cmd_summarize(const Options& o) {
  if (!o.out) throw DomainError("summarize needs --out pointing at an archive directory");
  const fs::path dir = *o.out;
  const auto s = summarize(read_archive_partitions(dir));
  write_summary_tables(dir, s);
  std::cout << summary_to_json(s).dump(2) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Shrinkage partition distributions: exact pmfs, theorem checks, and MCMC for partition models"};
  app.require_subcommand(1);
  Options o;
  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "JSON config file")->check(CLI::ExistingFile);
    sub->add_option("--seed", o.seed, "master seed");
    sub->add_option("--out", o.out, "output directory");
  };
  auto* verify = app.add_subcommand("verify", "run the theorem suite (n <= 5)");
  common(verify);
  verify->add_option("--theorem", o.theorem, "only checks whose id starts with this, e.g. 1b or 6");
  auto* pmf = app.add_subcommand("pmf", "exact pmf table of the configured distribution");
  common(pmf);
  pmf->add_flag("--anchor-mass", o.anchor_mass, "print only the anchor probability per omega");
  auto* sample = app.add_subcommand("sample", "seeded draws from the configured distribution");
  common(sample);
  auto* synth = app.add_subcommand("synth", "generate a synthetic panel and its truth");
  common(synth);
  auto* fit = app.add_subcommand("fit", "fit a partition regression model");
  common(fit);
  fit->add_option("--chains", o.chains, "independent chains");
  fit->add_option("--folds", o.folds, "cross-validate with this many folds")->check(CLI::Range(2, 1000000));
  auto* crossval = app.add_subcommand("crossval", "fit with k-fold cross-validation");
  common(crossval);
  crossval->add_option("--chains", o.chains, "independent chains");
  crossval->add_option("--folds", o.folds, "number of folds")->check(CLI::Range(2, 1000000));
  auto* summarize_cmd = app.add_subcommand("summarize", "recompute summaries from an archive");
  common(summarize_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kValidation;
  }

  try {
    if (*verify) return cmd_verify(o);
    if (*pmf) return cmd_pmf(o);
    if (*sample) return cmd_sample(o);
    if (*synth) return cmd_synth(o);
    if (*fit) return cmd_fit(o, false);
    if (*crossval) return cmd_fit(o, true);
    if (*summarize_cmd) return cmd_summarize(o);
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kValidation;
  } catch (const CapacityError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kValidation;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << '\n';
    return kRuntime;
  }
  return kRuntime;
}
