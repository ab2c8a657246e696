#ifndef SPD_STATS_HPP
#define SPD_STATS_HPP

#include <functional>
#include <span>

namespace spd {

double mean(std::span<const double> x);

/// Monte Carlo standard error of the mean of a correlated series by
/// overlapping batch means.  batch = 0 picks floor(sqrt(n)).  Returns 0 for
/// fewer than 2 values.
double obm_standard_error(std::span<const double> x, std::size_t batch = 0);

/// One-sample Kolmogorov-Smirnov statistic sup |F_n - F|.
double ks_statistic(std::span<const double> x, const std::function<double(double)>& cdf);

/// Asymptotic p-value of the KS statistic with Stephens' small-n correction.
double ks_p_value(double d, std::size_t n);

}  // namespace spd

#endif  // SPD_STATS_HPP
