#include <doctest.h>

#include "gsr/error.hpp"
#include "gsr/io.hpp"
#include "run_config.hpp"
#include "support.hpp"

using namespace gsr;
using nlohmann::json;

TEST_CASE("defaults validate for every dataset") {
  for (const char* d : {"sbm", "wikics", "ogbn-arxiv"}) CHECK_NOTHROW(cli::default_config(d).validate());
  CHECK_THROWS_AS(cli::default_config("cora"), ConfigError);
}

TEST_CASE("json overrides land in the right fields") {
  cli::RunConfig cfg = cli::default_config("sbm");
  cli::apply_json(cfg, json::parse(R"({"seed": 9, "arch": "sage", "taps": [1, 3],
      "train": {"epochs": 12, "optimizer": "sgd"}, "rbm": {"hidden_units": 7, "gibbs_rounds": 2},
      "grid": {"x_noise": "c", "a_noise": "z", "split": "val", "x_levels": [0, 50]},
      "sbm": {"num_nodes": 80}})"));
  CHECK(cfg.seed == 9);
  CHECK(cfg.arch == Arch::sage);
  CHECK(cfg.taps == std::vector<int>{1, 3});
  CHECK(cfg.train.epochs == 12);
  CHECK(cfg.train.optimizer == OptimizerKind::sgd);
  CHECK(cfg.rbm.hidden_units == 7);
  CHECK(cfg.gibbs_rounds == 2);
  CHECK(cfg.grid.x_kind == NoiseKind::Xc);
  CHECK(cfg.grid.a_kind == NoiseKind::Az);
  CHECK(cfg.grid.split == Split::val);
  CHECK(cfg.grid.x_levels == std::vector<int>{0, 50});
  CHECK(cfg.sbm.num_nodes == 80);
  CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("unknown keys are rejected with their path") {
  cli::RunConfig cfg = cli::default_config("sbm");
  try {
    cli::apply_json(cfg, json::parse(R"({"rbm": {"hiden_units": 3}})"));
    FAIL("accepted a typo");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("rbm.hiden_units") != std::string::npos);
  }
  CHECK_THROWS_AS(cli::apply_json(cfg, json::parse(R"({"colour": 1})")), ConfigError);
  CHECK_THROWS_AS(cli::apply_json(cfg, json::parse(R"({"seed": -1})")), ConfigError);
  CHECK_THROWS_AS(cli::apply_json(cfg, json::parse(R"({"arch": "resnet"})")), ConfigError);
  CHECK_THROWS_AS(cli::apply_json(cfg, json::parse(R"({"train": 3})")), ConfigError);
  CHECK_THROWS_AS(cli::apply_json(cfg, json::parse(R"([1])")), ConfigError);
}

TEST_CASE("validation catches out-of-range values") {
  cli::RunConfig cfg = cli::default_config("sbm");
  cfg.grid.x_levels = {0, 15};
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = cli::default_config("sbm");
  cfg.taps = {4};
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = cli::default_config("sbm");
  cfg.rbm.batch_size = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = cli::default_config("sbm");
  cfg.grid.x_kind = NoiseKind::Ac;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("preset applies before explicit keys") {
  cli::RunConfig cfg = cli::default_config("sbm");
  cli::apply_json(cfg, json::parse(R"({"rbm": {"epochs": 3}, "sbm": {"preset": "blanking", "num_nodes": 90}})"));
  CHECK(cfg.sbm_preset == "blanking");
  CHECK(cfg.sbm.feature_dim == 256);
  CHECK(cfg.sbm.num_nodes == 90);
  CHECK(cfg.rbm.epochs == 3);
  CHECK_THROWS_AS(cli::apply_json(cfg, json::parse(R"({"sbm": {"preset": "dense"}})")), ConfigError);
}

TEST_CASE("config file round trip through to_json") {
  gsr::test::TempDir dir;
  cli::RunConfig cfg = cli::default_config("sbm");
  cfg.seed = 31;
  cfg.taps = {0, 2};
  io::write_text_atomic(dir / "run.json", cli::to_json(cfg).dump());
  const cli::RunConfig back = cli::load_config(dir / "run.json");
  CHECK(back.seed == 31);
  CHECK(back.taps == cfg.taps);
  CHECK(back.rbm == cfg.rbm);
  CHECK(back.train == cfg.train);
  CHECK(back.grid.x_levels == cfg.grid.x_levels);
  io::write_text_atomic(dir / "broken.json", "{\"seed\": ");
  CHECK_THROWS_AS(cli::load_config(dir / "broken.json"), ConfigError);
}

TEST_CASE("stage seeds differ per stage and follow the root") {
  cli::RunConfig a = cli::default_config("sbm");
  cli::RunConfig b = a;
  b.seed = 1;
  CHECK(cli::stage_seed(a, 1) != cli::stage_seed(a, 2));
  CHECK(cli::stage_seed(a, 1) != cli::stage_seed(b, 1));
  CHECK(cli::stage_seed(a, 3) == cli::stage_seed(cli::default_config("sbm"), 3));
}
