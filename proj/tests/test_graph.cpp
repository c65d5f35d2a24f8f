#include <doctest.h>

#include <cmath>
#include <fstream>

#include "gsr/graph.hpp"
#include "gsr/io.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace gsr;
using gsr::test::make_graph;

namespace {

void write(const std::filesystem::path& p, const std::string& text) {
  std::filesystem::create_directories(p.parent_path());
  std::ofstream(p) << text;
}

}  // namespace

TEST_CASE("sbm is deterministic per seed") {
  SbmParams sp;
  const Graph a = generate_sbm_graph(sp);
  const Graph b = generate_sbm_graph(sp);
  CHECK(encode_graph(a) == encode_graph(b));
  CHECK(a.num_nodes == 600);
  CHECK(a.num_classes == 4);
  CHECK(a.features.cols() == 16);
  CHECK_NOTHROW(a.validate());
  sp.seed = 8;
  CHECK(graph_hash(generate_sbm_graph(sp)) != graph_hash(a));
}

TEST_CASE("sbm edge densities are within 3 sigma") {
  const SbmParams sp;
  const Graph g = generate_sbm_graph(sp);
  std::vector<std::size_t> per_class(4, 0);
  for (int l : g.labels) ++per_class[static_cast<std::size_t>(l)];
  double in_pairs = 0.0;
  for (auto c : per_class) in_pairs += static_cast<double>(c) * static_cast<double>(c - 1);
  const double all_pairs = 600.0 * 599.0;
  double in_edges = 0.0, out_edges = 0.0;
  for (const Edge& e : g.edge_list()) (g.labels[e.src] == g.labels[e.dst] ? in_edges : out_edges) += 1.0;
  const double p_in_hat = in_edges / in_pairs;
  const double p_out_hat = out_edges / (all_pairs - in_pairs);
  CHECK(std::abs(p_in_hat - sp.p_in) < 3.0 * std::sqrt(sp.p_in * (1 - sp.p_in) / in_pairs));
  CHECK(std::abs(p_out_hat - sp.p_out) < 3.0 * std::sqrt(sp.p_out * (1 - sp.p_out) / (all_pairs - in_pairs)));
}

TEST_CASE("sbm degenerate probabilities") {
  SbmParams sp;
  sp.p_in = sp.p_out = 0.0;
  CHECK(generate_sbm_graph(sp).num_edges() == 0);
  sp.num_nodes = 10;
  sp.num_classes = 2;
  sp.p_in = sp.p_out = 1.0;
  const Graph full = generate_sbm_graph(sp);
  CHECK(full.num_edges() == 90);
  for (const Edge& e : full.edge_list()) CHECK(e.src != e.dst);
  sp.num_classes = 11;
  CHECK_THROWS_AS(generate_sbm_graph(sp), ArgumentError);
}

TEST_CASE("sbm splits partition the nodes") {
  const Graph g = generate_sbm_graph(SbmParams{});
  CHECK(g.split.train.size() + g.split.val.size() + g.split.test.size() == 600);
  CHECK(g.split.test.size() == 120);
}

TEST_CASE("normalize_adjacency two-node example") {
  const Graph g = make_graph(2, {{0, 1}});
  const CsrMatrix a = normalize_adjacency(g, true);
  CHECK(a.at(0, 0) == doctest::Approx(0.5));
  CHECK(a.at(0, 1) == doctest::Approx(0.5));
  CHECK(a.at(1, 0) == doctest::Approx(0.5));
  CHECK(a.at(1, 1) == doctest::Approx(0.5));
}

TEST_CASE("normalize_adjacency degenerate graphs") {
  const Graph empty = make_graph(3, {});
  CHECK(normalize_adjacency(empty, true).to_dense() == DenseMatrix::identity(3));
  const Graph g = make_graph(3, {{0, 1}});
  const DenseMatrix a = normalize_adjacency(g, false).to_dense();
  for (std::size_t c = 0; c < 3; ++c) CHECK(a(2, c) == 0.0);
  CHECK(isolated_nodes(g) == std::vector<NodeId>{2});
}

TEST_CASE("normalize_adjacency matches dense oracle and is symmetric") {
  SbmParams sp;
  sp.num_nodes = 40;
  sp.p_in = 0.2;
  sp.p_out = 0.05;
  const Graph g = generate_sbm_graph(sp);
  for (bool loops : {true, false}) {
    const DenseMatrix got = normalize_adjacency(g, loops).to_dense();
    const DenseMatrix want = oracle::dense_normalized_adjacency(g, loops);
    for (std::size_t i = 0; i < 40; ++i)
      for (std::size_t j = 0; j < 40; ++j) {
        CHECK(got(i, j) == doctest::Approx(want(i, j)).epsilon(1e-12));
        CHECK(got(i, j) == got(j, i));
      }
  }
}

TEST_CASE("mean_aggregator averages symmetrized neighbours") {
  const Graph g = make_graph(3, {{0, 1}, {2, 1}});
  const DenseMatrix m = mean_aggregator(g).to_dense();
  CHECK(m(1, 0) == doctest::Approx(0.5));
  CHECK(m(1, 2) == doctest::Approx(0.5));
  CHECK(m(0, 1) == doctest::Approx(1.0));
  CHECK(m(1, 1) == 0.0);
}

TEST_CASE("native binary round trip") {
  gsr::test::TempDir dir;
  const Graph g = generate_sbm_graph(SbmParams{});
  save_graph(g, dir / "g.bin");
  const Graph back = load_graph(dir / "g.bin", GraphFormat::native_binary);
  CHECK(back == g);
  CHECK(graph_hash(back) == graph_hash(g));
}

TEST_CASE("decode rejects truncated and foreign data") {
  auto bytes = encode_graph(make_graph(2, {{0, 1}}));
  auto cut = bytes;
  cut.resize(cut.size() - 3);
  CHECK_THROWS_AS(decode_graph(cut), ParseError);
  bytes[0] = 'X';
  CHECK_THROWS_AS(decode_graph(bytes), ParseError);
}

TEST_CASE("wikics json loader") {
  gsr::test::TempDir dir;
  SUBCASE("single node with a self loop") {
    write(dir / "one.json",
          R"({"features":[[0.5,1.0]],"labels":[0],"links":[[0]],"val_masks":[[false]],"test_mask":[false]})");
    const Graph g = load_graph(dir / "one.json", GraphFormat::wikics_json);
    CHECK(g.num_nodes == 1);
    CHECK(g.num_edges() == 1);
    CHECK(g.split.train == std::vector<NodeId>{0});
  }
  SUBCASE("reciprocal links are one undirected edge") {
    write(dir / "three.json", R"({"features":[[1],[2],[3]],"labels":[0,1,2],"links":[[1],[0,2],[1]],
      "val_masks":[[false,true,false]],"test_mask":[false,false,true]})");
    const Graph g = load_graph(dir / "three.json", GraphFormat::wikics_json);
    CHECK(g.num_edges() == 2);
    CHECK(g.num_classes == 3);
    CHECK(g.split.val == std::vector<NodeId>{1});
    CHECK(g.split.test == std::vector<NodeId>{2});
  }
  SUBCASE("missing field is named") {
    write(dir / "bad.json", R"({"features":[[1]],"links":[[]],"val_masks":[[false]],"test_mask":[false]})");
    try {
      load_graph(dir / "bad.json", GraphFormat::wikics_json);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(std::string(e.what()).find("labels") != std::string::npos);
    }
  }
  SUBCASE("overlapping masks") {
    write(dir / "ov.json",
          R"({"features":[[1],[2]],"labels":[0,0],"links":[[],[]],"val_masks":[[true,false]],"test_mask":[true,false]})");
    CHECK_THROWS_AS(load_graph(dir / "ov.json", GraphFormat::wikics_json), IntegrityError);
  }
}

TEST_CASE("ogb directory loader") {
  gsr::test::TempDir dir;
  write(dir / "raw" / "node-feat.csv", "0.1,0.2\n0.3,0.4\n0.5,0.6\n0.7,0.8\n");
  write(dir / "raw" / "node-label.csv", "0\n1\n1\n0\n");
  write(dir / "raw" / "edge.csv", "0,1\n1,2\n3,0\n");
  write(dir / "split" / "time" / "train.csv", "0\n1\n");
  write(dir / "split" / "time" / "valid.csv", "2\n");
  write(dir / "split" / "time" / "test.csv", "3\n");
  const Graph g = load_graph(dir.path(), GraphFormat::ogb_dir);
  CHECK(g.num_nodes == 4);
  CHECK(g.num_edges() == 3);
  CHECK(g.directed);
  CHECK(g.features.cols() == 2);
  CHECK(g.num_classes == 2);
  CHECK(g.split.test == std::vector<NodeId>{3});

  write(dir / "raw" / "edge.csv", "0,1\n1,x\n");
  CHECK_THROWS_AS(load_graph(dir.path(), GraphFormat::ogb_dir), ParseError);
  CHECK_THROWS_AS(load_graph(dir / "nope", GraphFormat::ogb_dir), IoError);
}
