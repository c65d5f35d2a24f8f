#pragma once

#include "gsr/dense_matrix.hpp"
#include "gsr/sparse.hpp"

// Data-parallel numeric kernels. The default namespace holds the OpenMP
// versions; kernels::serial holds plain-loop reference versions used by the
// tests and the benchmark. Each output element is reduced by a single thread
// in ascending index order, so results do not depend on the thread count.
namespace gsr::kernels {

// a * b
DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b);
// a^T * b
DenseMatrix matmul_tn(const DenseMatrix& a, const DenseMatrix& b);
// a * b^T
DenseMatrix matmul_nt(const DenseMatrix& a, const DenseMatrix& b);
// sparse a * dense h
DenseMatrix spmm(const CsrMatrix& a, const DenseMatrix& h);
// d(i, j) = |x_i - x_j|^2
DenseMatrix pairwise_sq_distances(const DenseMatrix& x);

namespace serial {
DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix matmul_tn(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix matmul_nt(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix spmm(const CsrMatrix& a, const DenseMatrix& h);
DenseMatrix pairwise_sq_distances(const DenseMatrix& x);
}  // namespace serial

// Sets the OpenMP worker count; n == 0 leaves the runtime default.
void set_num_threads(int n);
int max_threads();

}  // namespace gsr::kernels
