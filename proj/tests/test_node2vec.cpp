#include <doctest.h>

#include <cmath>
#include <set>

#include "gsr/node2vec.hpp"
#include "support.hpp"

using namespace gsr;
using gsr::test::make_graph;

namespace {

WalkConfig small_cfg() {
  WalkConfig c;
  c.walks_per_node = 10;
  c.walk_length = 10;
  c.embedding_dim = 8;
  c.seed = 1;
  return c;
}

double cosine(std::span<const double> a, std::span<const double> b) {
  double ab = 0, aa = 0, bb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  return ab / std::sqrt(aa * bb);
}

}  // namespace

TEST_CASE("single edge forces alternating walks") {
  const Graph g = make_graph(2, {{0, 1}});
  WalkConfig c = small_cfg();
  c.walk_length = 4;
  const WalkSet ws = generate_walks(g, c);
  CHECK(ws.walks.size() == 20);
  for (const Walk& w : ws.walks) {
    REQUIRE(w.size() == 4);
    for (std::size_t i = 1; i < w.size(); ++i) CHECK(w[i] != w[i - 1]);
  }
}

TEST_CASE("first step from the middle of a path is fair") {
  const Graph g = make_graph(3, {{0, 1}, {1, 2}});
  WalkConfig c = small_cfg();
  c.walks_per_node = 10000;
  c.walk_length = 2;
  const WalkSet ws = generate_walks(g, c);
  double left = 0.0, total = 0.0;
  for (const Walk& w : ws.walks)
    if (w.front() == 1) {
      total += 1.0;
      left += w[1] == 0 ? 1.0 : 0.0;
    }
  CHECK(total == 10000.0);
  CHECK(std::abs(left / total - 0.5) < 3.0 * std::sqrt(0.25 / total));
}

TEST_CASE("isolated nodes are skipped") {
  const Graph g = make_graph(4, {});
  const WalkSet ws = generate_walks(g, small_cfg());
  CHECK(ws.walks.empty());
  CHECK(ws.skipped == std::vector<NodeId>{0, 1, 2, 3});
  CHECK_THROWS_AS(train_skipgram(ws, small_cfg()), ArgumentError);
}

TEST_CASE("walks follow symmetrized edges") {
  SbmParams sp;
  sp.num_nodes = 60;
  sp.p_in = 0.1;
  sp.p_out = 0.01;
  const Graph g = generate_sbm_graph(sp);
  std::set<std::pair<NodeId, NodeId>> edges;
  for (const Edge& e : g.edge_list()) {
    edges.emplace(e.src, e.dst);
    edges.emplace(e.dst, e.src);
  }
  WalkConfig c = small_cfg();
  c.p = 0.5;
  c.q = 2.0;
  for (const Walk& w : generate_walks(g, c).walks)
    for (std::size_t i = 1; i < w.size(); ++i) CHECK(edges.contains({w[i - 1], w[i]}));
}

TEST_CASE("skipgram separates disconnected cliques") {
  std::vector<Edge> edges;
  for (NodeId base : {0u, 6u})
    for (NodeId u = base; u < base + 6; ++u)
      for (NodeId v = u + 1; v < base + 6; ++v) edges.push_back({u, v});
  const Graph g = make_graph(12, edges);
  const WalkConfig c = small_cfg();
  const WalkSet ws = generate_walks(g, c);
  const DenseMatrix e = train_skipgram(ws, c);
  CHECK(e.all_finite());
  double within = 0, across = 0;
  int nw = 0, na = 0;
  for (std::size_t u = 0; u < 12; ++u)
    for (std::size_t v = u + 1; v < 12; ++v) {
      const double s = cosine(e.row(u), e.row(v));
      if ((u < 6) == (v < 6)) {
        within += s;
        ++nw;
      } else {
        across += s;
        ++na;
      }
    }
  CHECK(within / nw - across / na >= 0.2);
  CHECK(train_skipgram(ws, c) == e);
}

TEST_CASE("zero epochs leaves the initialization") {
  const Graph g = make_graph(3, {{0, 1}, {1, 2}});
  WalkConfig c = small_cfg();
  const WalkSet ws = generate_walks(g, c);
  c.epochs = 0;
  const DenseMatrix a = train_skipgram(ws, c);
  c.lr = 0.5;
  CHECK(train_skipgram(ws, c) == a);
  c.epochs = 1;
  CHECK_FALSE(train_skipgram(ws, c) == a);
}

TEST_CASE("compose_features") {
  const DenseMatrix x{{1, 2, 3}, {4, 5, 6}};
  const DenseMatrix e{{7, 8}, {9, 10}};
  CHECK(compose_features(x, e) == DenseMatrix{{1, 2, 3, 7, 8}, {4, 5, 6, 9, 10}});
  const DenseMatrix z = compose_features(x, DenseMatrix(2, 2));
  CHECK(z(0, 3) == 0.0);
  CHECK(z(1, 4) == 0.0);
  CHECK(compose_features(DenseMatrix(2, 0), e) == e);
  CHECK_THROWS_AS(compose_features(x, DenseMatrix(3, 2)), DimensionError);
}

TEST_CASE("embedding file round trip") {
  gsr::test::TempDir dir;
  const DenseMatrix e = gsr::test::gaussian(5, 3, 1);
  save_embeddings(e, dir / "e.bin");
  CHECK(load_embeddings(dir / "e.bin") == e);
}
