#include "thermoshift/matrix_family.hpp"

#include <cmath>
#include <string>

#include "thermoshift/error.hpp"

namespace thermoshift {

double entry_sum_norm(const Matrix& a) { return a.sum(); }

MatrixFamily::MatrixFamily(std::vector<Matrix> matrices, std::optional<double> tail_ratio)
    : matrices_(std::move(matrices)), tail_ratio_(tail_ratio) {
  if (matrices_.empty()) throw DomainError("matrix family is empty");
  dim_ = static_cast<std::size_t>(matrices_.front().rows());
  if (dim_ == 0) throw DomainError("matrix dimension must be >= 1");
  for (std::size_t k = 0; k < matrices_.size(); ++k) {
    const Matrix& a = matrices_[k];
    if (static_cast<std::size_t>(a.rows()) != dim_ || static_cast<std::size_t>(a.cols()) != dim_) {
      throw DomainError("matrix " + std::to_string(k + 1) + " is not " + std::to_string(dim_) +
                        "x" + std::to_string(dim_));
    }
    if (!a.allFinite() || (a.array() <= 0.0).any()) {
      throw DomainError("matrix " + std::to_string(k + 1) + " has a nonpositive entry");
    }
  }
  if (tail_ratio_ && !(*tail_ratio_ > 0.0 && *tail_ratio_ < 1.0)) {
    throw DomainError("geometric tail ratio must lie in (0,1)");
  }
}

MatrixFamily MatrixFamily::generated(Symbol count, const std::function<Matrix(Symbol)>& generator,
                                     std::optional<double> tail_ratio) {
  if (count < 1) throw DomainError("matrix family size must be >= 1");
  std::vector<Matrix> list;
  list.reserve(static_cast<std::size_t>(count));
  for (Symbol i = 1; i <= count; ++i) list.push_back(generator(i));
  return MatrixFamily(std::move(list), tail_ratio);
}

const Matrix& MatrixFamily::at(Symbol i) const {
  if (i < 1 || i > size()) {
    throw DomainError("no matrix for symbol " + std::to_string(i) + " (family has " +
                      std::to_string(size()) + ")");
  }
  return matrices_[static_cast<std::size_t>(i - 1)];
}

std::optional<double> MatrixFamily::norm_tail(Symbol m) const {
  if (!tail_ratio_) return std::nullopt;
  const double r = *tail_ratio_;
  const Symbol k = size();
  const double last = entry_sum_norm(matrices_.back());
  if (m >= k) return last * std::pow(r, static_cast<double>(m - k + 1)) / (1.0 - r);
  double sum = last * r / (1.0 - r);
  for (Symbol i = std::max<Symbol>(m + 1, 1); i <= k; ++i) sum += entry_sum_norm(at(i));
  return sum;
}

}  // namespace thermoshift
