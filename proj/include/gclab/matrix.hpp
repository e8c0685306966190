#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "gclab/error.hpp"

namespace gclab {

/// Dense square matrix, row-major. Sized for finite-state chains (k in the tens).
class Matrix {
 public:
  Matrix() = default;
  explicit Matrix(std::size_t k, double fill = 0.0) : k_(k), data_(k * k, fill) {}
  Matrix(std::initializer_list<std::initializer_list<double>> rows) : k_(rows.size()) {
    data_.reserve(k_ * k_);
    for (const auto& row : rows) {
      if (row.size() != k_) throw ValidationError("Matrix: rows must form a square");
      data_.insert(data_.end(), row.begin(), row.end());
    }
  }

  static Matrix identity(std::size_t k) {
    Matrix m(k);
    for (std::size_t i = 0; i < k; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t size() const noexcept { return k_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * k_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * k_ + j]; }

  std::span<const double> row(std::size_t i) const {
    return {data_.data() + i * k_, k_};
  }

  friend Matrix operator*(const Matrix& a, const Matrix& b) {
    const std::size_t k = a.k_;
    Matrix c(k);
    for (std::size_t i = 0; i < k; ++i)
      for (std::size_t l = 0; l < k; ++l) {
        const double ail = a(i, l);
        if (ail == 0.0) continue;
        for (std::size_t j = 0; j < k; ++j) c(i, j) += ail * b(l, j);
      }
    return c;
  }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t k_ = 0;
  std::vector<double> data_;
};

namespace detail {

inline void renormalize_rows(Matrix& m, double drift_tol) {
  for (std::size_t i = 0; i < m.size(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < m.size(); ++j) s += m(i, j);
    if (std::abs(s - 1.0) > drift_tol && s > 0.0)
      for (std::size_t j = 0; j < m.size(); ++j) m(i, j) /= s;
  }
}

}  // namespace detail

/// P^n for a row-stochastic P by repeated squaring. Rows are renormalized
/// whenever their sum drifts from 1 by more than 1e-12.
inline Matrix stochastic_power(const Matrix& p, std::size_t n) {
  Matrix result = Matrix::identity(p.size());
  Matrix base = p;
  while (n > 0) {
    if (n & 1U) {
      result = result * base;
      detail::renormalize_rows(result, 1e-12);
    }
    n >>= 1U;
    if (n > 0) {
      base = base * base;
      detail::renormalize_rows(base, 1e-12);
    }
  }
  return result;
}

}  // namespace gclab
