#ifndef SPD_BELL_HPP
#define SPD_BELL_HPP

#include <boost/multiprecision/cpp_int.hpp>

namespace spd {

using BigInt = boost::multiprecision::cpp_int;

/// Largest a + b served from the exact integer table.
inline constexpr int kExactBellCap = 400;
/// Largest a + b served at all (log-domain recurrence beyond the exact cap).
inline constexpr int kLogBellCap = 2000;

/// Extended Bell number B(a, b): the number of partitions obtained by
/// allocating `a` new items when `b` nonempty clusters already exist.
/// B(0, b) = 1, B(a + 1, b) = b B(a, b) + B(a, b + 1); B(a, 0) is the a-th
/// Bell number.  The table is cached process-wide and grows on demand.
/// Throws CapacityError when a + b > kExactBellCap.
BigInt extended_bell(int a, int b);

/// Natural log of B(a, b).  Exact-integer backed for a + b <= kExactBellCap,
/// log-domain recurrence up to kLogBellCap.
double log_extended_bell(int a, int b);

double log_of(const BigInt& value);

}  // namespace spd

#endif  // SPD_BELL_HPP
