#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>

namespace thermoshift {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();
inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Streaming max-shifted log-sum-exp. Result depends on insertion order only.
class LogSumExp {
 public:
  void add(double log_term) noexcept {
    if (log_term == kNegInf) return;
    if (log_term > max_) {
      sum_ = sum_ * std::exp(max_ - log_term) + 1.0;
      max_ = log_term;
    } else {
      sum_ += std::exp(log_term - max_);
    }
    ++count_;
  }

  void merge(const LogSumExp& other) noexcept {
    if (other.count_ == 0) return;
    if (count_ == 0) {
      *this = other;
      return;
    }
    if (other.max_ > max_) {
      sum_ = sum_ * std::exp(max_ - other.max_) + other.sum_;
      max_ = other.max_;
    } else {
      sum_ += other.sum_ * std::exp(other.max_ - max_);
    }
    count_ += other.count_;
  }

  double value() const noexcept { return count_ == 0 ? kNegInf : max_ + std::log(sum_); }
  unsigned long long count() const noexcept { return count_; }

 private:
  double max_ = kNegInf;
  double sum_ = 0.0;
  unsigned long long count_ = 0;
};

inline double log_sum_exp(std::span<const double> terms) noexcept {
  LogSumExp acc;
  for (double t : terms) acc.add(t);
  return acc.value();
}

}  // namespace thermoshift
