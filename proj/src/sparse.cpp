#include "gsr/sparse.hpp"

#include <algorithm>

namespace gsr {

double CsrMatrix::at(std::size_t r, std::size_t c) const {
  auto rc = row_cols(r);
  auto it = std::lower_bound(rc.begin(), rc.end(), static_cast<std::uint32_t>(c));
  if (it == rc.end() || *it != c) return 0.0;
  return weights[offsets[r] + static_cast<std::size_t>(it - rc.begin())];
}

DenseMatrix CsrMatrix::to_dense() const {
  DenseMatrix out(n, n);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t e = offsets[r]; e < offsets[r + 1]; ++e) out(r, cols[e]) += weights[e];
  return out;
}

CsrMatrix CsrMatrix::transposed() const {
  CsrMatrix t;
  t.n = n;
  t.offsets.assign(n + 1, 0);
  for (auto c : cols) ++t.offsets[c + 1];
  for (std::size_t i = 0; i < n; ++i) t.offsets[i + 1] += t.offsets[i];
  t.cols.resize(nnz());
  t.weights.resize(nnz());
  std::vector<std::size_t> cursor(t.offsets.begin(), t.offsets.end() - 1);
  // Rows are visited in ascending order, so each transposed row comes out sorted.
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t e = offsets[r]; e < offsets[r + 1]; ++e) {
      const std::size_t slot = cursor[cols[e]]++;
      t.cols[slot] = static_cast<std::uint32_t>(r);
      t.weights[slot] = weights[e];
    }
  }
  return t;
}

CsrMatrix CsrMatrix::identity(std::size_t n) {
  CsrMatrix m;
  m.n = n;
  m.offsets.resize(n + 1);
  m.cols.resize(n);
  m.weights.assign(n, 1.0);
  for (std::size_t i = 0; i <= n; ++i) m.offsets[i] = i;
  for (std::size_t i = 0; i < n; ++i) m.cols[i] = static_cast<std::uint32_t>(i);
  return m;
}

}  // namespace gsr
