#include <doctest.h>

#include <algorithm>

#include "gsr/distortion.hpp"
#include "support.hpp"

using namespace gsr;
using gsr::test::gaussian;
using gsr::test::make_graph;

namespace {

std::size_t differing(const DenseMatrix& a, const DenseMatrix& b) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < a.size(); ++i) n += a.values()[i] != b.values()[i] ? 1 : 0;
  return n;
}

}  // namespace

TEST_CASE("distortion_count is an exact floor") {
  CHECK(distortion_count(8, 50) == 4);
  CHECK(distortion_count(30, 30) == 9);
  CHECK(distortion_count(10, 33) == 3);
  CHECK(distortion_count(7, 100) == 7);
  CHECK(distortion_count(7, 0) == 0);
  for (std::size_t total : {1u, 3u, 7u, 97u, 1920u})
    for (int n = 0; n <= 100; ++n) CHECK(distortion_count(total, n) == total * static_cast<std::size_t>(n) / 100);
}

TEST_CASE("corrupt_features examples") {
  const DenseMatrix x = gaussian(5, 4, 1);
  const std::vector<NodeId> rows{1, 3};
  CHECK(corrupt_features(x, rows, 0, 1) == x);
  const DenseMatrix full = corrupt_features(x, rows, 100, 1);
  for (NodeId r : rows)
    for (std::size_t c = 0; c < 4; ++c) {
      const double d = full(r, c) - x(r, c);
      CHECK(d >= 0.0);
      CHECK(d < 1.0);
    }
  CHECK(differing(corrupt_features(x, rows, 50, 2), x) == 4);
  CHECK(corrupt_features(x, rows, 50, 2) == corrupt_features(x, rows, 50, 2));
  const DenseMatrix half = corrupt_features(x, rows, 50, 2);
  for (NodeId r : {0u, 2u, 4u})
    for (std::size_t c = 0; c < 4; ++c) CHECK(half(r, c) == x(r, c));
}

TEST_CASE("blank_features examples") {
  DenseMatrix x = gaussian(6, 10, 2);
  x(0, 0) = 0.0;  // pre-existing zero inside the target block
  const std::vector<NodeId> rows{0, 1, 2};
  CHECK(blank_features(x, rows, 0, 3) == x);
  const DenseMatrix all = blank_features(x, rows, 100, 3);
  for (NodeId r : rows)
    for (double v : all.row(r)) CHECK(v == 0.0);
  // 9 entries are chosen; the pre-existing zero can absorb one of them
  const DenseMatrix some = blank_features(x, rows, 30, 3);
  std::size_t introduced = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (some.values()[i] != x.values()[i]) CHECK(some.values()[i] == 0.0);
    introduced += some.values()[i] == 0.0 && x.values()[i] != 0.0 ? 1 : 0;
  }
  CHECK(introduced >= 8);
  CHECK(introduced <= 9);
}

TEST_CASE("blank_features count over a block without zeros") {
  const DenseMatrix x(3, 10, 1.5);
  const std::vector<NodeId> rows{0, 1, 2};
  CHECK(differing(blank_features(x, rows, 30, 4), x) == 9);
}

TEST_CASE("corrupt_adjacency examples") {
  // targets 0..9 point at non-targets 10..19; node 20 is the only pool member
  std::vector<Edge> edges;
  for (NodeId t = 0; t < 10; ++t) edges.push_back({t, static_cast<NodeId>(10 + t)});
  const Graph g = make_graph(21, edges);
  std::vector<NodeId> targets(10);
  for (NodeId t = 0; t < 10; ++t) targets[t] = t;
  const std::vector<NodeId> pool{20};

  CHECK(corrupt_adjacency(g, targets, 0, pool, 1) == g);
  const Graph all = corrupt_adjacency(g, targets, 100, pool, 1);
  for (const Edge& e : all.edge_list()) CHECK((e.src == 20 || e.dst == 20));

  const Graph some = corrupt_adjacency(g, targets, 30, pool, 1);
  CHECK(some.num_edges() == g.num_edges());
  std::size_t rewired = 0;
  for (const Edge& e : some.edge_list()) rewired += (e.dst == 20 || e.src == 20) ? 1 : 0;
  CHECK(rewired == 3);
  CHECK_THROWS_AS(corrupt_adjacency(g, targets, 30, std::vector<NodeId>{}, 1), ArgumentError);
}

TEST_CASE("blank_adjacency examples") {
  std::vector<Edge> edges;
  for (NodeId u = 0; u < 10; ++u) edges.push_back({u, static_cast<NodeId>((u + 1) % 10)});
  const Graph g = make_graph(10, edges);
  std::vector<std::size_t> idx(10);
  for (std::size_t i = 0; i < 10; ++i) idx[i] = i;
  CHECK(blank_adjacency(g, idx, 0, 1) == g);
  CHECK(blank_adjacency(g, idx, 100, 1).num_edges() == 0);
  CHECK(blank_adjacency(g, idx, 30, 1).num_edges() == 7);
  CHECK(blank_adjacency(g, idx, 30, 1) == blank_adjacency(g, idx, 30, 1));
}

TEST_CASE("incident edges and pools") {
  const Graph g = make_graph(4, {{0, 1}, {1, 2}, {2, 3}});
  const std::vector<NodeId> nodes{0};
  CHECK(incident_edges(g, nodes) == std::vector<std::size_t>{0});
  const std::vector<NodeId> mid{2};
  CHECK(incident_edges(g, mid).size() == 2);

  Graph s = generate_sbm_graph(SbmParams{});
  auto sorted = [](std::vector<NodeId> v) {
    std::sort(v.begin(), v.end());
    return v;
  };
  CHECK(sorted(rewire_pool(s, PoolPolicy::train_only)) == sorted(s.split.train));
  CHECK(rewire_pool(s, PoolPolicy::train_val).size() == s.split.train.size() + s.split.val.size());
  CHECK(rewire_pool(s, PoolPolicy::any).size() == 600);
  CHECK(default_pool_policy("ogbn-arxiv", Split::val) == PoolPolicy::train_only);
  CHECK(default_pool_policy("ogbn-arxiv", Split::test) == PoolPolicy::train_val);
  CHECK(default_pool_policy("wikics", Split::test) == PoolPolicy::any);
}

TEST_CASE("apply_noise keeps the train split and non-target edges intact") {
  const Graph g = generate_sbm_graph(SbmParams{});
  for (NoiseKind k : {NoiseKind::Xc, NoiseKind::Xz, NoiseKind::Ac, NoiseKind::Az}) {
    const Graph out = apply_noise(g, NoiseSpec{k, 70, PoolPolicy::any, Split::test, 5});
    CHECK(out.split == g.split);
    CHECK(out.labels == g.labels);
    for (NodeId v : g.split.train)
      for (std::size_t c = 0; c < g.features.cols(); ++c) CHECK(out.features(v, c) == g.features(v, c));
    CHECK(apply_noise(g, NoiseSpec{k, 70, PoolPolicy::any, Split::test, 5}) == out);
  }
  NoiseSpec bad{NoiseKind::Xc, 15};
  CHECK_THROWS_AS(bad.validate(), ArgumentError);
}

TEST_CASE("noise names parse") {
  for (NoiseKind k : {NoiseKind::Xc, NoiseKind::Xz, NoiseKind::Ac, NoiseKind::Az})
    CHECK(parse_noise_kind(to_string(k)) == k);
  for (PoolPolicy p : {PoolPolicy::train_only, PoolPolicy::train_val, PoolPolicy::any})
    CHECK(parse_pool_policy(to_string(p)) == p);
  CHECK_THROWS_AS(parse_noise_kind("Xq"), ArgumentError);
}
