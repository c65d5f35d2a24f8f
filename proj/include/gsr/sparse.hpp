#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "gsr/dense_matrix.hpp"

namespace gsr {

// Square weighted sparse matrix in CSR form; column indices sorted per row.
struct CsrMatrix {
  std::size_t n = 0;
  std::vector<std::size_t> offsets{0};
  std::vector<std::uint32_t> cols;
  std::vector<double> weights;

  std::size_t nnz() const { return cols.size(); }
  std::span<const std::uint32_t> row_cols(std::size_t r) const {
    return {cols.data() + offsets[r], offsets[r + 1] - offsets[r]};
  }
  std::span<const double> row_weights(std::size_t r) const {
    return {weights.data() + offsets[r], offsets[r + 1] - offsets[r]};
  }

  double at(std::size_t r, std::size_t c) const;
  DenseMatrix to_dense() const;
  CsrMatrix transposed() const;
  static CsrMatrix identity(std::size_t n);
};

}  // namespace gsr
