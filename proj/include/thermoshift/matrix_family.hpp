#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <vector>

#include "thermoshift/shift.hpp"

namespace thermoshift {

using Matrix = Eigen::MatrixXd;

/// ||A|| = U^t A U with U the all-ones vector: the sum of all entries.
double entry_sum_norm(const Matrix& a);

/// Strictly positive d x d matrices A_1..A_K. Beyond the stored list the
/// norms may be declared to decay geometrically (||A_{k+1}|| <= r ||A_k||).
class MatrixFamily {
 public:
  explicit MatrixFamily(std::vector<Matrix> matrices,
                        std::optional<double> tail_ratio = std::nullopt);

  static MatrixFamily generated(Symbol count, const std::function<Matrix(Symbol)>& generator,
                                std::optional<double> tail_ratio = std::nullopt);

  std::size_t dim() const noexcept { return dim_; }
  Symbol size() const noexcept { return static_cast<Symbol>(matrices_.size()); }
  /// 1-based; throws DomainError outside 1..size().
  const Matrix& at(Symbol i) const;
  const std::vector<Matrix>& matrices() const noexcept { return matrices_; }
  std::optional<double> tail_ratio() const noexcept { return tail_ratio_; }

  /// Bound on sum_{i>m} ||A_i|| when a tail ratio is declared.
  std::optional<double> norm_tail(Symbol m) const;

 private:
  std::vector<Matrix> matrices_;
  std::optional<double> tail_ratio_;
  std::size_t dim_ = 0;
};

}  // namespace thermoshift
