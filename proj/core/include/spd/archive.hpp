#ifndef SPD_ARCHIVE_HPP
#define SPD_ARCHIVE_HPP

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "spd/mcmc.hpp"
#include "spd/summary.hpp"

namespace spd {

/// Library version plus `git describe` of the build tree when available.
std::string version_string();

/// Writes one CSV per quantity into `dir`:
///   partitions.csv    chain,iteration,time,labels
///   permutations.csv  chain,iteration,time,order
///   scalars.csv       chain,iteration,omega,grit
///   anchor.csv        chain,iteration,labels        (hierarchical only)
///   coefficients.csv  chain,iteration,time,name,cluster,index,value
/// plus manifest.json (config, seeds, version) and summary.json.
void write_archive(const std::filesystem::path& dir, const std::vector<ChainResult>& chains, const ModelSpec& model,
                   const nlohmann::json& manifest_extra, bool coefficients = true);

/// Co-clustering matrices (cocluster_t<k>.csv) and the ARI matrix (ari.csv).
void write_summary_tables(const std::filesystem::path& dir, const PosteriorSummary& s);

/// partitions.csv back into draws[d][t], in file order.
std::vector<std::vector<Partition>> read_archive_partitions(const std::filesystem::path& dir);

}  // namespace spd

#endif  // SPD_ARCHIVE_HPP
