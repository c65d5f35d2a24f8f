#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "gsr/distortion.hpp"
#include "gsr/graph.hpp"
#include "gsr/nn.hpp"
#include "gsr/node2vec.hpp"
#include "gsr/rbm.hpp"
#include "gsr/tsne.hpp"

namespace gsr::cli {

struct GridSettings {
  NoiseKind x_kind = NoiseKind::Xz;
  NoiseKind a_kind = NoiseKind::Az;
  Split split = Split::test;
  std::vector<int> x_levels{0, 10, 20, 30, 40, 50, 60, 70, 80, 90, 100};
  std::vector<int> a_levels{0, 10, 20, 30, 40, 50, 60, 70, 80, 90, 100};
  int n2v_az_cutoff = 40;
};

struct ProjectSettings {
  int n_x = 60;
  int n_a = 0;
  std::size_t max_points = 500;
};

// Everything one run needs. Loaded from JSON, then overridden by flags.
struct RunConfig {
  std::string dataset = "sbm";  // wikics | ogbn-arxiv | sbm
  std::filesystem::path data_path;  // empty: resolve under the data dir
  std::string sbm_preset = "default";  // default | blanking
  SbmParams sbm;
  std::uint64_t seed = 0;
  std::filesystem::path out = "run";
  Arch arch = Arch::gcn;
  std::vector<int> taps{0, 1, 2, 3};
  int jobs = 0;
  TrainConfig train;
  RbmTrainConfig rbm;
  std::size_t gibbs_rounds = 1;
  WalkConfig node2vec;
  GridSettings grid;
  TsneConfig tsne;
  ProjectSettings project;

  void validate() const;
};

// Baseline for a dataset before any file or flag is applied.
RunConfig default_config(const std::string& dataset);

// Applies a JSON document onto `cfg`. Unknown keys and wrong types throw
// ConfigError naming the offending key.
void apply_json(RunConfig& cfg, const nlohmann::json& doc);
RunConfig load_config(const std::filesystem::path& path, const std::string& dataset_override = "");

nlohmann::json to_json(const RunConfig& cfg);

// Per-stage seeds all hang off the root seed.
std::uint64_t stage_seed(const RunConfig& cfg, std::uint64_t stage);

}  // namespace gsr::cli
