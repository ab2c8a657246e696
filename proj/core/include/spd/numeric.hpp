#ifndef SPD_NUMERIC_HPP
#define SPD_NUMERIC_HPP

#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <vector>

namespace spd {

using Rng = std::mt19937_64;

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// log(sum(exp(x))). Returns -inf for an empty span or all -inf entries.
double log_sum_exp(std::span<const double> x);

// Overwrites log-weights with normalized probabilities (max-subtraction).
// Entries at -inf become exactly 0.
void normalize_log_weights(std::span<double> log_w);

// Draws an index from unnormalized log-weights.
std::size_t sample_log_weights(std::span<const double> log_w, Rng& rng);

double uniform01(Rng& rng);

// Derives an independent stream seed for task `index` from a master seed
// (splitmix64 finalizer).
std::uint64_t split_seed(std::uint64_t master, std::uint64_t index);

}  // namespace spd

#endif  // SPD_NUMERIC_HPP
