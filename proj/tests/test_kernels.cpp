#include <doctest.h>

#include "gsr/graph.hpp"
#include "gsr/kernels.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace gsr;
using gsr::test::gaussian;

namespace {

void check_close(const DenseMatrix& a, const DenseMatrix& b, double tol = 1e-12) {
  REQUIRE(a.rows() == b.rows());
  REQUIRE(a.cols() == b.cols());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a.values()[i] == doctest::Approx(b.values()[i]).epsilon(tol));
}

}  // namespace

TEST_CASE("parallel kernels equal serial kernels bit for bit") {
  // oversubscribe so the parallel path really splits work
  kernels::set_num_threads(4);
  const DenseMatrix a = gaussian(37, 19, 1);
  const DenseMatrix b = gaussian(19, 23, 2);
  const DenseMatrix c = gaussian(37, 23, 3);
  CHECK(kernels::matmul(a, b) == kernels::serial::matmul(a, b));
  CHECK(kernels::matmul_tn(a, c) == kernels::serial::matmul_tn(a, c));
  const DenseMatrix e = gaussian(11, 23, 8);
  CHECK(kernels::matmul_nt(c, e) == kernels::serial::matmul_nt(c, e));
  CHECK(kernels::pairwise_sq_distances(a) == kernels::serial::pairwise_sq_distances(a));

  SbmParams sp;
  sp.num_nodes = 37;
  sp.p_in = 0.3;
  const CsrMatrix adj = normalize_adjacency(generate_sbm_graph(sp), true);
  CHECK(kernels::spmm(adj, a) == kernels::serial::spmm(adj, a));
  kernels::set_num_threads(0);
}

TEST_CASE("kernels agree with naive oracles") {
  const DenseMatrix a = gaussian(8, 5, 4);
  const DenseMatrix b = gaussian(5, 6, 5);
  check_close(kernels::serial::matmul(a, b), oracle::naive_matmul(a, b));
  check_close(kernels::serial::matmul_tn(a, gaussian(8, 3, 6)), oracle::naive_matmul(a.transposed(), gaussian(8, 3, 6)));
  check_close(kernels::serial::matmul_nt(a, gaussian(4, 5, 7)), oracle::naive_matmul(a, gaussian(4, 5, 7).transposed()));

  SbmParams sp;
  sp.num_nodes = 8;
  sp.p_in = 0.5;
  const Graph g = generate_sbm_graph(sp);
  const CsrMatrix adj = normalize_adjacency(g, true);
  check_close(kernels::spmm(adj, a), oracle::naive_matmul(oracle::dense_normalized_adjacency(g, true), a));

  const DenseMatrix d = kernels::pairwise_sq_distances(a);
  for (std::size_t i = 0; i < 8; ++i)
    for (std::size_t j = 0; j < 8; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < 5; ++k) s += (a(i, k) - a(j, k)) * (a(i, k) - a(j, k));
      CHECK(d(i, j) == doctest::Approx(s).epsilon(1e-12));
    }
}

TEST_CASE("matmul shape errors") {
  CHECK_THROWS_AS(kernels::matmul(DenseMatrix(2, 3), DenseMatrix(2, 3)), DimensionError);
  CHECK_THROWS_AS(kernels::serial::matmul(DenseMatrix(2, 3), DenseMatrix(2, 3)), DimensionError);
}

TEST_CASE("dense matrix helpers") {
  const DenseMatrix m{{1, 2}, {3, 4}};
  CHECK(m.transposed() == DenseMatrix{{1, 3}, {2, 4}});
  CHECK(hconcat(m, DenseMatrix{{5}, {6}}) == DenseMatrix{{1, 2, 5}, {3, 4, 6}});
  CHECK(column_sums(m) == Vector{4, 6});
  const std::vector<std::size_t> rows{1, 0};
  CHECK(m.select_rows(rows) == DenseMatrix{{3, 4}, {1, 2}});
  DenseMatrix n = m;
  n(0, 0) = std::nan("");
  CHECK_FALSE(n.all_finite());
  CHECK_THROWS_AS(hconcat(m, DenseMatrix(3, 1)), DimensionError);
}
