#include "spd/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace spd {

double mean(std::span<const double> x) {
  if (x.empty()) return 0.0;
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double obm_standard_error(std::span<const double> x, std::size_t batch) {
  const std::size_t n = x.size();
  if (n < 2) return 0.0;
  std::size_t b = batch ? batch : static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(n))));
  b = std::clamp<std::size_t>(b, 1, n - 1);
  const double mu = mean(x);
  // Sliding window sums over all n - b + 1 batches.
  double window = std::accumulate(x.begin(), x.begin() + static_cast<std::ptrdiff_t>(b), 0.0);
  double ss = 0.0;
  for (std::size_t j = 0;; ++j) {
    const double d = window / static_cast<double>(b) - mu;
    ss += d * d;
    if (j + b >= n) break;
    window += x[j + b] - x[j];
  }
  const double batches = static_cast<double>(n - b + 1);
  const double var = static_cast<double>(n) * static_cast<double>(b) * ss / ((batches - 1.0) * batches);
  return std::sqrt(var / static_cast<double>(n));
}

double ks_statistic(std::span<const double> x, const std::function<double(double)>& cdf) {
  std::vector<double> s(x.begin(), x.end());
  std::sort(s.begin(), s.end());
  const double n = static_cast<double>(s.size());
  double d = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double f = cdf(s[i]);
    d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
  }
  return d;
}

double ks_p_value(double d, std::size_t n) {
  const double rn = std::sqrt(static_cast<double>(n));
  const double lambda = (rn + 0.12 + 0.11 / rn) * d;
  if (lambda < 1e-3) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 200; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += (k % 2 ? 1.0 : -1.0) * term;
    if (term < 1e-16) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

}  // namespace spd
