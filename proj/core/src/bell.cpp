#include "spd/bell.hpp"

#include <cmath>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <vector>

#include "spd/errors.hpp"

namespace spd {

namespace {

// Triangular table over { (a, b) : a + b <= cap }.
template <typename T>
class Triangle {
 public:
  explicit Triangle(int cap) : cap_(cap), values_(static_cast<std::size_t>(cap + 1) * (cap + 2) / 2) {}
  int cap() const { return cap_; }
  T& at(int a, int b) { return values_[index(a, b)]; }
  const T& at(int a, int b) const { return values_[index(a, b)]; }

 private:
  std::size_t index(int a, int b) const {
    // Row a holds b = 0..cap-a; rows are laid out consecutively.
    const std::size_t row_start = static_cast<std::size_t>(a) * (cap_ + 1) - static_cast<std::size_t>(a) * (a - 1) / 2;
    return row_start + b;
  }
  int cap_;
  std::vector<T> values_;
};

template <typename T, typename Step>
std::unique_ptr<Triangle<T>> build(int cap, const T& one, Step step) {
  auto t = std::make_unique<Triangle<T>>(cap);
  for (int b = 0; b <= cap; ++b) t->at(0, b) = one;
  for (int a = 0; a < cap; ++a)
    for (int b = 0; a + 1 + b <= cap; ++b) t->at(a + 1, b) = step(b, t->at(a, b), t->at(a, b + 1));
  return t;
}

class BellCache {
 public:
  BigInt exact(int a, int b) {
    check(a, b, kExactBellCap);
    {
      std::shared_lock lock(mutex_);
      if (exact_ && a + b <= exact_->cap()) return exact_->at(a, b);
    }
    std::unique_lock lock(mutex_);
    grow_exact(a + b);
    return exact_->at(a, b);
  }

  double log_value(int a, int b) {
    check(a, b, kLogBellCap);
    if (a + b <= kExactBellCap) {
      {
        std::shared_lock lock(mutex_);
        if (exact_log_ && a + b <= exact_log_->cap()) return exact_log_->at(a, b);
      }
      std::unique_lock lock(mutex_);
      grow_exact(a + b);
      return exact_log_->at(a, b);
    }
    {
      std::shared_lock lock(mutex_);
      if (recurrence_log_ && a + b <= recurrence_log_->cap()) return recurrence_log_->at(a, b);
    }
    std::unique_lock lock(mutex_);
    if (!recurrence_log_ || recurrence_log_->cap() < a + b) {
      const int cap = std::min(kLogBellCap, std::max(a + b, recurrence_log_ ? 2 * recurrence_log_->cap() : 0));
      recurrence_log_ = build<double>(cap, 0.0, [](int b, double same, double next) {
        if (b == 0) return next;
        const double x = std::log(static_cast<double>(b)) + same;
        const double hi = std::max(x, next);
        return hi + std::log1p(std::exp(std::min(x, next) - hi));
      });
    }
    return recurrence_log_->at(a, b);
  }

 private:
  static void check(int a, int b, int cap) {
    if (a < 0 || b < 0) throw DomainError("extended Bell numbers need a, b >= 0");
    if (a + b > cap)
      throw CapacityError("extended Bell table capped at a + b <= " + std::to_string(cap));
  }

  // Requires the unique lock.
  void grow_exact(int need) {
    if (exact_ && exact_->cap() >= need) return;
    const int cap = std::min(kExactBellCap, std::max({need, 32, exact_ ? 2 * exact_->cap() : 0}));
    exact_ = build<BigInt>(cap, BigInt(1), [](int b, const BigInt& same, const BigInt& next) {
      return BigInt(b) * same + next;
    });
    exact_log_ = std::make_unique<Triangle<double>>(cap);
    for (int a = 0; a <= cap; ++a)
      for (int b = 0; a + b <= cap; ++b) exact_log_->at(a, b) = log_of(exact_->at(a, b));
  }

  std::shared_mutex mutex_;
  std::unique_ptr<Triangle<BigInt>> exact_;
  std::unique_ptr<Triangle<double>> exact_log_;
  std::unique_ptr<Triangle<double>> recurrence_log_;
};

BellCache& cache() {
  static BellCache instance;
  return instance;
}

}  // namespace

BigInt extended_bell(int a, int b) { return cache().exact(a, b); }

double log_extended_bell(int a, int b) { return cache().log_value(a, b); }

double log_of(const BigInt& value) {
  if (value <= 0) throw DomainError("log of a non-positive integer");
  const auto bits = boost::multiprecision::msb(value);
  if (bits < 1000) return std::log(value.convert_to<double>());
  const auto shift = bits - 64;
  const BigInt top = value >> shift;
  return std::log(top.convert_to<double>()) + static_cast<double>(shift) * std::log(2.0);
}

}  // namespace spd
