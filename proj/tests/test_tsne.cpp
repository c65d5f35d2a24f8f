#include <doctest.h>

#include <cmath>

#include "gsr/kernels.hpp"
#include "gsr/tsne.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace gsr;
using gsr::test::gaussian;

TEST_CASE("conditional affinities hit the target perplexity") {
  const DenseMatrix x = gaussian(60, 5, 1);
  std::vector<double> achieved;
  const DenseMatrix p = conditional_affinities(kernels::pairwise_sq_distances(x), 10.0, &achieved);
  REQUIRE(achieved.size() == 60);
  for (double a : achieved) CHECK(std::abs(a - 10.0) < 1e-3);
  for (std::size_t i = 0; i < 60; ++i) {
    double s = 0.0;
    for (double v : p.row(i)) s += v;
    CHECK(std::abs(s - 1.0) < 1e-9);
    CHECK(p(i, i) == 0.0);
  }
}

TEST_CASE("joint affinities are symmetric and normalized") {
  const DenseMatrix p = joint_affinities(gaussian(40, 3, 2), 8.0);
  double total = 0.0;
  for (std::size_t i = 0; i < 40; ++i)
    for (std::size_t j = 0; j < 40; ++j) {
      CHECK(p(i, j) == p(j, i));
      total += p(i, j);
    }
  CHECK(total == doctest::Approx(1.0));
}

TEST_CASE("gradient matches finite differences") {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const DenseMatrix p = joint_affinities(gaussian(10, 4, seed), 3.0);
    DenseMatrix y = gaussian(10, 2, seed + 10);
    const DenseMatrix g = tsne_gradient(p, y);
    const auto num = oracle::central_differences(y.values(), [&] { return tsne_kl(p, y); });
    for (std::size_t i = 0; i < num.size(); ++i) CHECK(oracle::relative_error(g.values()[i], num[i]) <= 1e-3);
  }
}

TEST_CASE("three separated clusters stay separated") {
  const double cx[3] = {0.0, 10.0, 5.0};
  const double cy[3] = {0.0, 0.0, 8.660254};
  DenseMatrix x(150, 2);
  std::vector<int> labels(150);
  const DenseMatrix noise = gaussian(150, 2, 3);
  for (std::size_t r = 0; r < 150; ++r) {
    labels[r] = static_cast<int>(r / 50);
    x(r, 0) = cx[r / 50] + noise(r, 0);
    x(r, 1) = cy[r / 50] + noise(r, 1);
  }
  const TsneResult res = tsne_embed(x);
  CHECK(res.coords.rows() == 150);
  CHECK(res.coords.cols() == 2);
  CHECK(oracle::silhouette(res.coords, labels) > 0.5);
  REQUIRE(res.kl_history.front().first == 0);
  CHECK(res.kl_history.back().first == 1000);
  double kl500 = NAN;
  for (const auto& [it, kl] : res.kl_history)
    if (it == 500) kl500 = kl;
  CHECK(kl500 < res.kl_history.front().second);
  CHECK(tsne_embed(x).coords == res.coords);
}

TEST_CASE("duplicated rows land together") {
  DenseMatrix x = gaussian(150, 6, 0);
  for (std::size_t c = 0; c < 6; ++c) x(1, c) = x(0, c);
  // A split pair is a legitimate local minimum now and then, so count over seeds.
  int together = 0;
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    TsneConfig cfg;
    cfg.perplexity = 30.0;
    cfg.iterations = 1000;
    cfg.seed = seed;
    const TsneResult res = tsne_embed(x, cfg);
    const double dx = res.coords(0, 0) - res.coords(1, 0);
    const double dy = res.coords(0, 1) - res.coords(1, 1);
    if (std::sqrt(dx * dx + dy * dy) < 1e-3) ++together;
  }
  CHECK(together >= 3);
}

TEST_CASE("perplexity too large for the sample") {
  TsneConfig cfg;
  cfg.perplexity = 30.0;
  CHECK_THROWS_AS(tsne_embed(gaussian(50, 3, 5), cfg), ArgumentError);
}

TEST_CASE("pca keeps the dominant direction") {
  DenseMatrix x = gaussian(100, 5, 6, 0.01);
  for (std::size_t r = 0; r < 100; ++r) x(r, 2) += static_cast<double>(r);
  const DenseMatrix z = pca_reduce(x, 1);
  REQUIRE(z.cols() == 1);
  CHECK(std::abs(z(99, 0) - z(0, 0)) == doctest::Approx(99.0).epsilon(1e-3));
}

TEST_CASE("snapshot csv round trip") {
  EmbeddingSnapshot a;
  a.tap = 0;
  a.variant = SnapshotVariant::noisy;
  a.coords = DenseMatrix{{1.5, -2.25}, {0.125, 3.0}};
  a.labels = {2, 0};
  EmbeddingSnapshot b = a;
  b.tap = 3;
  b.variant = SnapshotVariant::desired;
  const std::vector<EmbeddingSnapshot> snaps{a, b};
  const std::string csv = snapshots_csv(snaps);
  CHECK(csv.rfind("tap,variant,x,y,label\n", 0) == 0);
  const auto back = parse_snapshots_csv(csv);
  REQUIRE(back.size() == 2);
  CHECK(back[0].coords == a.coords);
  CHECK(back[1].tap == 3);
  CHECK(back[1].variant == SnapshotVariant::desired);
  CHECK(back[0].labels == a.labels);
  CHECK_THROWS_AS(parse_snapshots_csv("tap,variant,x,y,label\n1,bogus,0,0,0\n"), ParseError);
}
