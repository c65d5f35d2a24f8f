#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "gsr/distortion.hpp"
#include "gsr/pipeline.hpp"
#include "gsr/tsne.hpp"

namespace gsr {

// Noise levels 0, 10, ..., 100 on both axes.
inline constexpr int kGridSteps = 11;
inline constexpr int kGridCells = kGridSteps * kGridSteps;

struct GridMeta {
  std::string arch;
  std::string pipeline;  // "phi" or "psi<tap>"
  std::string x_kind;
  std::string a_kind;
  std::string split;
  std::uint64_t seed = 0;
  std::string started;
  std::string finished;
};

// values[ix * 11 + ia] is the accuracy at n_X = 10 ix, n_A = 10 ia.
// NaN marks an absent cell (undefined configuration or failure).
struct AccuracyGrid {
  std::array<double, kGridCells> values;
  std::array<std::uint8_t, kGridCells> failed{};
  GridMeta meta;

  AccuracyGrid();
  double at(int ix, int ia) const { return values[static_cast<std::size_t>(ix * kGridSteps + ia)]; }
  double& at(int ix, int ia) { return values[static_cast<std::size_t>(ix * kGridSteps + ia)]; }
  bool absent(int ix, int ia) const;
};

struct GridRequest {
  NoiseKind x_kind = NoiseKind::Xc;
  NoiseKind a_kind = NoiseKind::Ac;
  std::vector<int> taps;
  Split split = Split::test;  // split whose accuracy is reported
  std::uint64_t seed = 0;
  PoolPolicy val_pool = PoolPolicy::any;
  PoolPolicy test_pool = PoolPolicy::any;
  // Noise levels (percent) actually evaluated on each axis; the rest stay absent.
  std::vector<int> x_levels{0, 10, 20, 30, 40, 50, 60, 70, 80, 90, 100};
  std::vector<int> a_levels{0, 10, 20, 30, 40, 50, 60, 70, 80, 90, 100};
  // node2vec cells above this A_z level are left absent.
  int n2v_az_cutoff = 40;

  void validate() const;
};

struct GridResult {
  std::vector<AccuracyGrid> grids;  // phi first, then psi per tap in ascending order
  std::array<std::uint64_t, kGridCells> instance_hash{};
  std::vector<std::string> failures;
};

// The distorted graph for one cell: validation and test rows both receive
// the feature and adjacency noise. Feature noise is seeded from (seed, n_X)
// and adjacency noise from (seed, n_A), so all cells sharing a level share
// that half of the distortion.
Graph noisy_instance(const Graph& g, const GridRequest& req, int n_x, int n_a);

// Evaluates phi and every requested psi on the same noisy instance per cell.
GridResult run_grid(const PsiBundle& bundle, const Graph& g, const GridRequest& req);

struct RunManifest {
  std::string dataset;
  std::string model_checkpoint;
  std::map<int, std::string> rbm_checkpoints;
  std::vector<std::string> noise;  // e.g. "Xz", "Ac:any"
  std::uint64_t seed = 0;
  std::string version = "0.1.0";
};

// 12 lines: header row of n_A values, then one row per n_X.
std::string grid_csv(const AccuracyGrid& grid);
std::string grid_file_name(const AccuracyGrid& grid);

nlohmann::json grid_to_json(const AccuracyGrid& grid);
AccuracyGrid grid_from_json(const nlohmann::json& j);
nlohmann::json manifest_to_json(const RunManifest& m);
RunManifest manifest_from_json(const nlohmann::json& j);

std::string render_html(std::span<const AccuracyGrid> grids, const RunManifest& manifest,
                        std::span<const EmbeddingSnapshot> snapshots);

// Writes one CSV per grid, results.json and report.html (plus snapshots.csv
// when snapshots are given). Returns the files written.
std::vector<std::filesystem::path> export_report(std::span<const AccuracyGrid> grids, const RunManifest& manifest,
                                                 const std::filesystem::path& out_dir,
                                                 std::span<const EmbeddingSnapshot> snapshots = {});

struct LoadedResults {
  RunManifest manifest;
  std::vector<AccuracyGrid> grids;
};
LoadedResults load_results(const std::filesystem::path& results_json);

std::string utc_timestamp();

}  // namespace gsr
