#ifndef SPD_ERRORS_HPP
#define SPD_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace spd {

/// Invalid argument or violated precondition (bad labels, size mismatch, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Request exceeds a documented enumeration or table cap.
class CapacityError : public std::length_error {
 public:
  using std::length_error::length_error;
};

/// Numerical breakdown (non-SPD matrix and similar).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace spd

#endif  // SPD_ERRORS_HPP
