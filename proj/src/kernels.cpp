#include "gsr/kernels.hpp"

#include <omp.h>

#include <string>

namespace gsr::kernels {
namespace {

void check_inner(std::size_t lhs, std::size_t rhs, const char* op) {
  if (lhs != rhs) {
    throw DimensionError(std::string(op) + ": inner dimensions " + std::to_string(lhs) + " and " +
                         std::to_string(rhs) + " differ");
  }
}

}  // namespace

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
  check_inner(a.cols(), b.rows(), "matmul");
  const auto m = static_cast<std::ptrdiff_t>(a.rows());
  const std::size_t k = a.cols();
  const std::size_t n = b.cols();
  DenseMatrix out(a.rows(), n);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < m; ++i) {
    double* o = out.data() + i * n;
    const double* ai = a.data() + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = ai[p];
      const double* bp = b.data() + p * n;
      for (std::size_t j = 0; j < n; ++j) o[j] += av * bp[j];
    }
  }
  return out;
}

DenseMatrix matmul_tn(const DenseMatrix& a, const DenseMatrix& b) {
  check_inner(a.rows(), b.rows(), "matmul_tn");
  const auto m = static_cast<std::ptrdiff_t>(a.cols());
  const std::size_t k = a.rows();
  const std::size_t lda = a.cols();
  const std::size_t n = b.cols();
  DenseMatrix out(a.cols(), n);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < m; ++i) {
    double* o = out.data() + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = a.data()[p * lda + static_cast<std::size_t>(i)];
      if (av == 0.0) continue;
      const double* bp = b.data() + p * n;
      for (std::size_t j = 0; j < n; ++j) o[j] += av * bp[j];
    }
  }
  return out;
}

DenseMatrix matmul_nt(const DenseMatrix& a, const DenseMatrix& b) {
  check_inner(a.cols(), b.cols(), "matmul_nt");
  const auto m = static_cast<std::ptrdiff_t>(a.rows());
  const std::size_t k = a.cols();
  const std::size_t n = b.rows();
  DenseMatrix out(a.rows(), n);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < m; ++i) {
    const double* ai = a.data() + i * k;
    for (std::size_t j = 0; j < n; ++j) {
      const double* bj = b.data() + j * k;
      double s = 0.0;
      for (std::size_t p = 0; p < k; ++p) s += ai[p] * bj[p];
      out(static_cast<std::size_t>(i), j) = s;
    }
  }
  return out;
}

DenseMatrix spmm(const CsrMatrix& a, const DenseMatrix& h) {
  check_inner(a.n, h.rows(), "spmm");
  const auto m = static_cast<std::ptrdiff_t>(a.n);
  const std::size_t n = h.cols();
  DenseMatrix out(a.n, n);
#pragma omp parallel for schedule(dynamic, 64)
  for (std::ptrdiff_t i = 0; i < m; ++i) {
    double* o = out.data() + i * n;
    for (std::size_t e = a.offsets[i]; e < a.offsets[i + 1]; ++e) {
      const double w = a.weights[e];
      const double* hr = h.data() + static_cast<std::size_t>(a.cols[e]) * n;
      for (std::size_t j = 0; j < n; ++j) o[j] += w * hr[j];
    }
  }
  return out;
}

DenseMatrix pairwise_sq_distances(const DenseMatrix& x) {
  const auto m = static_cast<std::ptrdiff_t>(x.rows());
  const std::size_t d = x.cols();
  DenseMatrix out(x.rows(), x.rows());
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t i = 0; i < m; ++i) {
    const double* xi = x.data() + i * d;
    for (std::ptrdiff_t j = 0; j < m; ++j) {
      const double* xj = x.data() + j * d;
      double s = 0.0;
      for (std::size_t p = 0; p < d; ++p) {
        const double diff = xi[p] - xj[p];
        s += diff * diff;
      }
      out(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) = s;
    }
  }
  return out;
}

namespace serial {

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
  check_inner(a.cols(), b.rows(), "matmul");
  DenseMatrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double s = 0.0;
      for (std::size_t p = 0; p < a.cols(); ++p) s += a(i, p) * b(p, j);
      out(i, j) = s;
    }
  return out;
}

DenseMatrix matmul_tn(const DenseMatrix& a, const DenseMatrix& b) {
  check_inner(a.rows(), b.rows(), "matmul_tn");
  DenseMatrix out(a.cols(), b.cols());
  for (std::size_t i = 0; i < a.cols(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double s = 0.0;
      for (std::size_t p = 0; p < a.rows(); ++p) s += a(p, i) * b(p, j);
      out(i, j) = s;
    }
  return out;
}

DenseMatrix matmul_nt(const DenseMatrix& a, const DenseMatrix& b) {
  check_inner(a.cols(), b.cols(), "matmul_nt");
  DenseMatrix out(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.rows(); ++j) {
      double s = 0.0;
      for (std::size_t p = 0; p < a.cols(); ++p) s += a(i, p) * b(j, p);
      out(i, j) = s;
    }
  return out;
}

DenseMatrix spmm(const CsrMatrix& a, const DenseMatrix& h) {
  check_inner(a.n, h.rows(), "spmm");
  DenseMatrix out(a.n, h.cols());
  for (std::size_t i = 0; i < a.n; ++i)
    for (std::size_t e = a.offsets[i]; e < a.offsets[i + 1]; ++e)
      for (std::size_t j = 0; j < h.cols(); ++j) out(i, j) += a.weights[e] * h(a.cols[e], j);
  return out;
}

DenseMatrix pairwise_sq_distances(const DenseMatrix& x) {
  DenseMatrix out(x.rows(), x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = 0; j < x.rows(); ++j) {
      double s = 0.0;
      for (std::size_t p = 0; p < x.cols(); ++p) {
        const double diff = x(i, p) - x(j, p);
        s += diff * diff;
      }
      out(i, j) = s;
    }
  return out;
}

}  // namespace serial

void set_num_threads(int n) {
  if (n > 0) omp_set_num_threads(n);
}

int max_threads() { return omp_get_max_threads(); }

}  // namespace gsr::kernels
