#include "spd/numeric.hpp"

#include <algorithm>
#include <cmath>

namespace spd {

double log_sum_exp(std::span<const double> x) {
  if (x.empty()) return kNegInf;
  const double m = *std::max_element(x.begin(), x.end());
  if (m == kNegInf) return kNegInf;
  if (std::isinf(m)) return m;
  double s = 0.0;
  for (double v : x) s += std::exp(v - m);
  return m + std::log(s);
}

void normalize_log_weights(std::span<double> log_w) {
  const double lse = log_sum_exp(log_w);
  for (double& v : log_w) v = (v == kNegInf) ? 0.0 : std::exp(v - lse);
}

std::size_t sample_log_weights(std::span<const double> log_w, Rng& rng) {
  const double m = *std::max_element(log_w.begin(), log_w.end());
  double total = 0.0;
  for (double v : log_w) total += std::exp(v - m);
  double u = uniform01(rng) * total;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < log_w.size(); ++i) {
    const double w = std::exp(log_w[i] - m);
    if (w <= 0.0) continue;
    last_positive = i;
    if (u < w) return i;
    u -= w;
  }
  return last_positive;
}

double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::uint64_t split_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace spd
