#include <doctest.h>

#include <cmath>
#include <sstream>

#include "gsr/evaluation.hpp"
#include "gsr/io.hpp"
#include "gsr/metrics.hpp"
#include "gsr/node2vec.hpp"
#include "support.hpp"

using namespace gsr;

namespace {

const Graph& sbm() {
  static const Graph g = generate_sbm_graph(SbmParams{});
  return g;
}

const PsiBundle& gcn_bundle() {
  static const PsiBundle b = [] {
    TrainConfig tc;
    tc.epochs = 80;
    tc.seed = 3;
    RbmTrainConfig rc;
    rc.hidden_units = 8;
    rc.epochs = 5;
    rc.batch_size = 32;
    const std::vector<int> taps{0, 2};
    return train_psi_bundle(train_dnn(sbm(), Arch::gcn, tc), sbm(), taps, rc);
  }();
  return b;
}

AccuracyGrid sample_grid() {
  AccuracyGrid g;
  for (int ix = 0; ix < kGridSteps; ++ix)
    for (int ia = 0; ia < kGridSteps; ++ia) g.at(ix, ia) = 1.0 / (1 + ix + ia) + 1e-9 * ia;
  g.at(10, 10) = std::nan("");
  g.meta = {"gcn", "psi0", "Xc", "Ac", "test", 7, "2026-01-01T00:00:00Z", "2026-01-01T00:01:00Z"};
  return g;
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  for (std::string l; std::getline(ss, l);) out.push_back(l);
  return out;
}

}  // namespace

TEST_CASE("accuracy examples") {
  const std::vector<int> labels{0, 1, 2, 1, 0, 2, 1, 0, 2, 1};
  std::vector<NodeId> all(10);
  for (NodeId i = 0; i < 10; ++i) all[i] = i;
  CHECK(accuracy(labels, labels, all) == 1.0);
  std::vector<int> shifted = labels;
  for (int& p : shifted) p = (p + 1) % 3;
  CHECK(accuracy(shifted, labels, all) == 0.0);
  const std::vector<int> p4{0, 1, 2, 0};
  const std::vector<NodeId> four{0, 1, 2, 3};
  CHECK(accuracy(p4, labels, four) == 0.75);
  CHECK_THROWS_AS(accuracy(p4, labels, std::vector<NodeId>{}), ArgumentError);
  CHECK(argmax_rows(DenseMatrix{{1, 3, 3}, {2, 2, 0}}) == std::vector<int>{1, 0});
}

TEST_CASE("noisy instances are deterministic and leave the train split alone") {
  GridRequest req;
  req.seed = 5;
  const Graph a = noisy_instance(sbm(), req, 50, 30);
  CHECK(graph_hash(a) == graph_hash(noisy_instance(sbm(), req, 50, 30)));
  CHECK(noisy_instance(sbm(), req, 0, 0) == sbm());
  for (NodeId v : sbm().split.train)
    for (std::size_t c = 0; c < 16; ++c) CHECK(a.features(v, c) == sbm().features(v, c));
  // feature noise depends only on n_X
  CHECK(noisy_instance(sbm(), req, 50, 30).features == noisy_instance(sbm(), req, 50, 80).features);
  CHECK_THROWS_AS(noisy_instance(sbm(), req, 55, 0), ArgumentError);
}

TEST_CASE("gcn phi collapses under total corruption") {
  GridRequest req;
  req.seed = 1;
  req.x_levels = {0, 100};
  req.a_levels = {0, 100};
  const GridResult r = run_grid(gcn_bundle(), sbm(), req);
  REQUIRE(r.grids.size() == 1);
  const AccuracyGrid& phi = r.grids[0];
  CHECK(phi.at(0, 0) - phi.at(10, 10) >= 0.30);
  CHECK(phi.absent(5, 5));
  CHECK_FALSE(phi.absent(10, 0));
}

TEST_CASE("grid cells share one noisy instance across pipelines") {
  GridRequest req;
  req.seed = 2;
  req.taps = {2, 0};
  req.x_levels = {0, 30};
  req.a_levels = {0, 60};
  const GridResult r = run_grid(gcn_bundle(), sbm(), req);
  REQUIRE(r.grids.size() == 3);
  CHECK(r.grids[1].meta.pipeline == "psi0");
  CHECK(r.grids[2].meta.pipeline == "psi2");
  CHECK(r.failures.empty());
  for (int nx : req.x_levels)
    for (int na : req.a_levels) {
      const auto pos = static_cast<std::size_t>(nx / 10 * kGridSteps + na / 10);
      CHECK(r.instance_hash[pos] == graph_hash(noisy_instance(sbm(), req, nx, na)));
      const Graph noisy = noisy_instance(sbm(), req, nx, na);
      CHECK(r.grids[1].values[pos] ==
            accuracy(run_psi(gcn_bundle(), noisy, 0).predictions, sbm().labels, sbm().split.test));
    }
  CHECK(r.grids[0].at(0, 0) == accuracy(forward_phi(gcn_bundle().model(), sbm()).predictions, sbm().labels,
                                        sbm().split.test));
}

TEST_CASE("grid request validation") {
  GridRequest req;
  req.taps = {1};
  CHECK_THROWS_AS(run_grid(gcn_bundle(), sbm(), req), ConfigError);
  req.taps = {};
  req.x_kind = NoiseKind::Ac;
  CHECK_THROWS_AS(req.validate(), ArgumentError);
  req.x_kind = NoiseKind::Xc;
  req.split = Split::train;
  CHECK_THROWS_AS(req.validate(), ArgumentError);
}

TEST_CASE("node2vec cells past the blanking cutoff are absent") {
  WalkConfig wc;
  wc.walks_per_node = 2;
  wc.walk_length = 8;
  wc.embedding_dim = 4;
  const DenseMatrix emb = train_skipgram(generate_walks(sbm(), wc), wc);
  TrainConfig tc;
  tc.epochs = 5;
  const PsiBundle b(train_dnn(sbm(), Arch::n2v, tc, &emb), {});
  GridRequest req;
  req.x_kind = NoiseKind::Xz;
  req.a_kind = NoiseKind::Az;
  req.x_levels = {0};
  const GridResult r = run_grid(b, sbm(), req);
  for (int ia = 0; ia < kGridSteps; ++ia) CHECK(r.grids[0].absent(0, ia) == (ia * 10 > 40));
}

TEST_CASE("grid csv shape and formatting") {
  const AccuracyGrid g = sample_grid();
  const auto rows = lines(grid_csv(g));
  REQUIRE(rows.size() == 12);
  for (const auto& r : rows) CHECK(std::count(r.begin(), r.end(), ',') == 11);
  CHECK(rows[0] == "n_X\\n_A,0,10,20,30,40,50,60,70,80,90,100");
  CHECK(rows[1].rfind("0,1,0.5,", 0) == 0);
  CHECK(rows[11].substr(rows[11].size() - 3) == ",NA");
  CHECK(grid_file_name(g) == "gcn_psi0_Xc_Ac_test.csv");
}

TEST_CASE("grid json round trip keeps absent cells") {
  AccuracyGrid g = sample_grid();
  g.failed[3] = 1;
  const AccuracyGrid back = grid_from_json(nlohmann::json::parse(grid_to_json(g).dump()));
  CHECK(back.absent(10, 10));
  CHECK(back.at(2, 3) == g.at(2, 3));
  CHECK(back.failed == g.failed);
  CHECK(back.meta.pipeline == "psi0");
  CHECK_THROWS_AS(grid_from_json(nlohmann::json::parse(R"({"meta":{}})")), ParseError);
}

TEST_CASE("export_report") {
  gsr::test::TempDir dir;
  RunManifest man;
  man.dataset = "sbm";
  man.model_checkpoint = "model.bin";
  man.rbm_checkpoints = {{0, "rbm0.bin"}};
  man.noise = {"Xc", "Ac:any"};
  man.seed = 7;
  std::vector<AccuracyGrid> grids{sample_grid()};
  grids.push_back(sample_grid());
  grids[1].meta.pipeline = "phi";

  try {
    export_report(std::vector<AccuracyGrid>{}, man, dir.path());
    FAIL("expected an error");
  } catch (const ArgumentError& e) {
    CHECK(std::string(e.what()).find("nothing to export") != std::string::npos);
  }

  const auto files = export_report(grids, man, dir / "a");
  const auto again = export_report(grids, man, dir / "b");
  CHECK(files.size() == again.size());
  for (const char* name : {"gcn_psi0_Xc_Ac_test.csv", "gcn_phi_Xc_Ac_test.csv", "results.json", "report.html"})
    CHECK(io::read_text(dir / "a" / name) == io::read_text(dir / "b" / name));
  CHECK(lines(io::read_text(dir / "a" / "gcn_phi_Xc_Ac_test.csv")).size() == 12);
  const std::string html = io::read_text(dir / "a" / "report.html");
  CHECK(html.find("<svg") != std::string::npos);
  CHECK(html.find("src=") == std::string::npos);
  CHECK(html.find("href=") == std::string::npos);

  const LoadedResults back = load_results(dir / "a" / "results.json");
  CHECK(back.manifest.seed == 7);
  CHECK(back.manifest.rbm_checkpoints.at(0) == "rbm0.bin");
  CHECK(back.grids.size() == 2);
  CHECK(back.grids[0].at(1, 2) == grids[0].at(1, 2));
}

TEST_CASE("export_report writes snapshots") {
  gsr::test::TempDir dir;
  EmbeddingSnapshot s;
  s.tap = 1;
  s.variant = SnapshotVariant::denoised;
  s.coords = DenseMatrix{{0.5, -1.0}, {2.0, 3.0}};
  s.labels = {0, 1};
  const std::vector<EmbeddingSnapshot> snaps{s};
  const std::vector<AccuracyGrid> grids{sample_grid()};
  export_report(grids, RunManifest{}, dir.path(), snaps);
  CHECK(std::filesystem::exists(dir / "snapshots.csv"));
  CHECK(io::read_text(dir / "report.html").find("denoised") != std::string::npos);
}
