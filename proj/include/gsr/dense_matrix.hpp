#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "gsr/error.hpp"

namespace gsr {

using Vector = std::vector<double>;

// Row-major dense matrix of doubles. Carries features, layer
// representations and weights.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), values_(rows * cols, fill) {}
  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> values);
  DenseMatrix(std::initializer_list<std::initializer_list<double>> rows);

  static DenseMatrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return values_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {values_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {values_.data() + r * cols_, cols_}; }

  double* data() { return values_.data(); }
  const double* data() const { return values_.data(); }
  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }

  void fill(double v);
  bool all_finite() const;

  // Rows picked by index, in the given order.
  DenseMatrix select_rows(std::span<const std::size_t> rows) const;
  DenseMatrix transposed() const;

  bool operator==(const DenseMatrix& other) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
};

void require_same_shape(const DenseMatrix& a, const DenseMatrix& b, const std::string& what);

// [a | b] column-wise.
DenseMatrix hconcat(const DenseMatrix& a, const DenseMatrix& b);

// Adds bias to every row in place.
void add_row_bias(DenseMatrix& m, std::span<const double> bias);

// Column sums.
Vector column_sums(const DenseMatrix& m);

double frobenius_norm(const DenseMatrix& m);

}  // namespace gsr
