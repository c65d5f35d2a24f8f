#include <benchmark/benchmark.h>

#include <random>

#include "gsr/graph.hpp"
#include "gsr/kernels.hpp"
#include "gsr/rng.hpp"

using namespace gsr;

namespace {

DenseMatrix random_matrix(std::size_t r, std::size_t c, std::uint64_t seed) {
  Rng rng = make_rng(seed, {0xbe});
  std::normal_distribution<double> nd;
  DenseMatrix m(r, c);
  for (double& v : m.values()) v = nd(rng);
  return m;
}

const CsrMatrix& sbm_operator(std::size_t n) {
  static std::size_t cached_n = 0;
  static CsrMatrix op;
  if (cached_n != n) {
    SbmParams p;
    p.num_nodes = n;
    p.p_in = 20.0 / static_cast<double>(n);
    p.p_out = 1.0 / static_cast<double>(n);
    op = normalize_adjacency(generate_sbm_graph(p), true);
    cached_n = n;
  }
  return op;
}

template <DenseMatrix (*F)(const DenseMatrix&, const DenseMatrix&)>
void square_product(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const DenseMatrix a = random_matrix(n, n, 1);
  const DenseMatrix b = random_matrix(n, n, 2);
  for (auto _ : state) benchmark::DoNotOptimize(F(a, b));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * n * n));
}

template <DenseMatrix (*F)(const CsrMatrix&, const DenseMatrix&)>
void sparse_product(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const CsrMatrix& a = sbm_operator(n);
  const DenseMatrix h = random_matrix(n, 64, 3);
  for (auto _ : state) benchmark::DoNotOptimize(F(a, h));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(a.nnz() * 64));
}

template <DenseMatrix (*F)(const DenseMatrix&)>
void distances(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const DenseMatrix x = random_matrix(n, 50, 4);
  for (auto _ : state) benchmark::DoNotOptimize(F(x));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n * n));
}

}  // namespace

BENCHMARK(square_product<kernels::serial::matmul>)->Name("matmul/serial")->Arg(128)->Arg(256);
BENCHMARK(square_product<kernels::matmul>)->Name("matmul/omp")->Arg(128)->Arg(256);
BENCHMARK(square_product<kernels::serial::matmul_tn>)->Name("matmul_tn/serial")->Arg(128)->Arg(256);
BENCHMARK(square_product<kernels::matmul_tn>)->Name("matmul_tn/omp")->Arg(128)->Arg(256);
BENCHMARK(square_product<kernels::serial::matmul_nt>)->Name("matmul_nt/serial")->Arg(128)->Arg(256);
BENCHMARK(square_product<kernels::matmul_nt>)->Name("matmul_nt/omp")->Arg(128)->Arg(256);
BENCHMARK(sparse_product<kernels::serial::spmm>)->Name("spmm/serial")->Arg(2000)->Arg(10000);
BENCHMARK(sparse_product<kernels::spmm>)->Name("spmm/omp")->Arg(2000)->Arg(10000);
BENCHMARK(distances<kernels::serial::pairwise_sq_distances>)->Name("sqdist/serial")->Arg(500)->Arg(1000);
BENCHMARK(distances<kernels::pairwise_sq_distances>)->Name("sqdist/omp")->Arg(500)->Arg(1000);

BENCHMARK_MAIN();
