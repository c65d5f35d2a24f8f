#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gsr/dense_matrix.hpp"
#include "gsr/graph.hpp"
#include "gsr/optim.hpp"
#include "gsr/sparse.hpp"

namespace gsr {

enum class Arch { mlp, n2v, gcn, sage };
enum class Mode { train, infer };
enum class OptimizerKind { adam, sgd };

std::string to_string(Arch a);
Arch parse_arch(const std::string& name);
bool uses_graph(Arch a);

struct BatchNormState {
  Vector gamma;
  Vector beta;
  Vector running_mean;
  Vector running_var;
  double momentum = 0.1;  // weight of the new batch statistic
  double epsilon = 1e-5;

  static BatchNormState init(std::size_t features);
  std::size_t features() const { return gamma.size(); }
  bool operator==(const BatchNormState&) const = default;
};

struct TrainConfig {
  std::size_t epochs = 200;
  double learning_rate = 0.01;
  double dropout_p = 0.5;
  std::size_t hidden_dim = 64;
  std::uint64_t seed = 0;
  OptimizerKind optimizer = OptimizerKind::adam;

  void validate() const;
  bool operator==(const TrainConfig&) const = default;
};

// One NN_l block. `neigh_weight` is used by SAGE only (empty otherwise).
struct LayerParams {
  DenseMatrix weight;
  DenseMatrix neigh_weight;
  Vector bias;
  bool operator==(const LayerParams&) const = default;
};

// Three weight layers; the first two are followed by BN -> ReLU -> dropout.
struct DnnModel {
  Arch arch = Arch::mlp;
  std::size_t input_dim = 0;
  std::size_t hidden_dim = 0;
  std::size_t num_classes = 0;
  double dropout_p = 0.0;
  std::array<LayerParams, 3> layers;
  std::array<BatchNormState, 2> bn;
  DenseMatrix embeddings;  // node2vec rows for Arch::n2v, else empty
  TrainConfig config;

  void validate() const;
  bool operator==(const DnnModel&) const = default;
};

// Graph propagation operator for one architecture. GCN: normalized adjacency
// with self loops (symmetric). SAGE: neighbor-mean operator and its transpose.
struct Propagation {
  Arch arch = Arch::mlp;
  CsrMatrix op;
  CsrMatrix op_t;
};

Propagation make_propagation(Arch arch, const Graph& g);

// z0: raw features, or [features | embeddings] for node2vec models.
DenseMatrix model_input(const DnnModel& model, const Graph& g);

// He-uniform weights, zero biases, identity batch norm.
DnnModel init_model(Arch arch, std::size_t input_dim, std::size_t hidden_dim, std::size_t num_classes,
                    double dropout_p, std::uint64_t seed);

// ---- layer primitives ----

DenseMatrix dense_forward(const DenseMatrix& x, const DenseMatrix& w, std::span<const double> b);
DenseMatrix gcn_forward(const DenseMatrix& h, const CsrMatrix& a_norm, const DenseMatrix& w, std::span<const double> b);
DenseMatrix sage_forward(const DenseMatrix& h, const Graph& g, const DenseMatrix& w_self, const DenseMatrix& w_neigh,
                         std::span<const double> b);
DenseMatrix sage_forward(const DenseMatrix& h, const CsrMatrix& mean_op, const DenseMatrix& w_self,
                         const DenseMatrix& w_neigh, std::span<const double> b);

struct BatchNormCache {
  DenseMatrix xhat;
  Vector inv_std;
};

// Train mode normalizes by batch statistics and folds them into the running
// statistics; infer mode uses the running statistics only.
DenseMatrix batchnorm_forward(const DenseMatrix& z, BatchNormState& state, Mode mode, BatchNormCache* cache = nullptr);
DenseMatrix batchnorm_infer(const DenseMatrix& z, const BatchNormState& state);

struct BatchNormGrads {
  DenseMatrix dz;
  Vector dgamma;
  Vector dbeta;
};
BatchNormGrads batchnorm_backward(const DenseMatrix& dy, const BatchNormCache& cache, std::span<const double> gamma);

struct ActivationResult {
  DenseMatrix out;
  DenseMatrix mask;  // per entry: 0 (dropped) or 1/(1-p); all ones in infer mode
};

// ReLU followed by inverted dropout in train mode.
ActivationResult activation_forward(const DenseMatrix& z, double dropout_p, Mode mode, std::uint64_t seed);
// ReLU followed by a caller-supplied dropout mask.
ActivationResult activation_forward(const DenseMatrix& z, const DenseMatrix& mask);

DenseMatrix log_softmax(const DenseMatrix& z);

struct NllResult {
  double loss = 0.0;
  DenseMatrix log_probs;
};
NllResult log_softmax_nll(const DenseMatrix& logits, std::span<const int> labels, std::span<const NodeId> mask);
// d(loss)/d(logits) for the mean NLL over `mask`.
DenseMatrix nll_gradient(const DenseMatrix& log_probs, std::span<const int> labels, std::span<const NodeId> mask);

// ---- whole-network passes ----

struct LayerCache {
  DenseMatrix input;
  DenseMatrix aggregated;  // A*H for GCN/SAGE, empty for MLP
  DenseMatrix z;
  BatchNormCache bn;
  DenseMatrix pre_dropout;  // BN output
  DenseMatrix mask;
};

struct ForwardCache {
  std::array<LayerCache, 3> layers;
  DenseMatrix logits;
  bool valid = false;
};

// Train-mode forward. When `frozen_masks` is given those dropout masks are
// used instead of fresh draws.
DenseMatrix forward_train(DnnModel& model, const DenseMatrix& z0, const Propagation& prop, ForwardCache& cache,
                          std::uint64_t dropout_seed, const std::array<DenseMatrix, 2>* frozen_masks = nullptr);

struct ModelGrads {
  std::array<LayerParams, 3> layers;
  std::array<Vector, 2> dgamma;
  std::array<Vector, 2> dbeta;
};

ModelGrads zero_grads(const DnnModel& model);
ModelGrads backward_pass(const DnnModel& model, const Propagation& prop, const ForwardCache& cache,
                         const DenseMatrix& d_logits);

// Every trainable buffer of `model` paired with the matching buffer in `grads`.
std::vector<ParamView> parameter_views(DnnModel& model, const ModelGrads& grads);

// Inference-time representations z0..z3 (taps are pre-batch-norm).
struct Taps {
  DenseMatrix z0, z1, z2, z3;
  const DenseMatrix& at(int tap) const;
  DenseMatrix& at(int tap);
};

// Runs inference starting from representation `z_tap` placed at `tap`
// (0 = input, 1/2 = pre-BN hidden outputs, 3 = logits). Taps before `tap`
// are copied from `prefix`.
Taps forward_from_tap(const DnnModel& model, int tap, DenseMatrix z_tap, const Propagation& prop, Taps prefix = {});
Taps forward_infer(const DnnModel& model, const DenseMatrix& z0, const Propagation& prop);

struct TrainHistory {
  std::vector<double> train_loss;
  std::vector<double> val_accuracy;
  std::size_t best_epoch = 0;
};

// Full-batch training on the train split; keeps the epoch with the best
// validation accuracy.
DnnModel train_dnn(const Graph& g, Arch arch, const TrainConfig& cfg, const DenseMatrix* n2v_embeddings = nullptr,
                   TrainHistory* history = nullptr);

// Versioned checkpoint, magic "GSRM".
std::vector<std::uint8_t> encode_model(const DnnModel& model);
DnnModel decode_model(std::vector<std::uint8_t> bytes, const std::string& source = "<memory>");
void save_model(const DnnModel& model, const std::filesystem::path& path);
DnnModel load_model(const std::filesystem::path& path);

}  // namespace gsr
