#pragma once

#include <filesystem>
#include <functional>
#include <map>
#include <span>
#include <vector>

#include "gsr/graph.hpp"
#include "gsr/nn.hpp"
#include "gsr/rbm.hpp"

namespace gsr {

// Representation taps: 0 = network input, 1/2 = pre-BN outputs of the hidden
// layers, 3 = logits.
inline constexpr int kNumTaps = 4;
void check_tap(int tap);
std::size_t tap_width(const DnnModel& model, int tap);
std::vector<int> parse_taps(const std::string& csv);

struct RbmEntry {
  GbRbm rbm;
  Scaler scaler;
  RbmTrainConfig config;
};

// A trained network plus one RBM per denoised tap. Immutable once built.
class PsiBundle {
 public:
  PsiBundle(DnnModel model, std::map<int, RbmEntry> rbms, ReconstructOptions recon = {});

  const DnnModel& model() const { return model_; }
  const std::map<int, RbmEntry>& rbms() const { return rbms_; }
  const ReconstructOptions& recon() const { return recon_; }
  bool has_tap(int tap) const { return rbms_.contains(tap); }
  const RbmEntry& rbm(int tap) const;
  std::vector<int> taps() const;

 private:
  DnnModel model_;
  std::map<int, RbmEntry> rbms_;
  ReconstructOptions recon_;
};

struct PipelineOutput {
  Taps taps;
  std::vector<int> predictions;
};

// The trained network in inference mode (BN running stats, no dropout).
PipelineOutput forward_phi(const DnnModel& model, const Graph& g);

// Tap representation restricted to `rows`, computed on the whole graph.
DenseMatrix extract_representations(const DnnModel& model, const Graph& g, int tap, std::span<const NodeId> rows);

// Maps a tap representation (rows to denoise only) to its reconstruction.
using Reconstructor = std::function<DenseMatrix(int tap, const DenseMatrix& rows)>;

// Runs the network on `g_noisy` up to `tap`, replaces the rows in
// `denoise_rows` with their reconstruction and continues from there.
PipelineOutput run_psi_with(const DnnModel& model, const Graph& g_noisy, int tap, std::span<const NodeId> denoise_rows,
                            const Reconstructor& reconstructor);

PipelineOutput run_psi(const PsiBundle& bundle, const Graph& g_noisy, int tap, std::span<const NodeId> denoise_rows);
// Denoises the validation and test rows; train rows are never touched.
PipelineOutput run_psi(const PsiBundle& bundle, const Graph& g_noisy, int tap);

std::vector<NodeId> non_train_nodes(const Graph& g);

// Trains RBM-z_i for every requested tap on the clean train-split
// representations of `g`.
PsiBundle train_psi_bundle(DnnModel model, const Graph& clean, std::span<const int> taps, const RbmTrainConfig& cfg,
                           ReconstructOptions recon = {});

// JSON manifest: {"model": path, "rbms": {"<tap>": path}, "gibbs_rounds": n}.
struct BundleManifest {
  std::filesystem::path model;
  std::map<int, std::filesystem::path> rbms;
  std::size_t gibbs_rounds = 1;
};
void save_bundle_manifest(const BundleManifest& m, const std::filesystem::path& path);
BundleManifest load_bundle_manifest(const std::filesystem::path& path);
PsiBundle load_bundle(const std::filesystem::path& manifest_path);

}  // namespace gsr
