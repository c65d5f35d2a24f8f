#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gsr/dense_matrix.hpp"

namespace gsr {

struct TsneConfig {
  double perplexity = 30.0;
  std::size_t iterations = 1000;
  double learning_rate = 200.0;
  std::uint64_t seed = 0;
  double early_exaggeration = 12.0;
  std::size_t exaggeration_iters = 250;
  double initial_momentum = 0.5;
  double final_momentum = 0.8;
  std::size_t momentum_switch = 250;
  std::size_t pca_dims = 50;  // inputs wider than this are PCA-reduced first
  std::size_t kl_every = 50;
};

struct TsneResult {
  DenseMatrix coords;                                     // rows x 2
  std::vector<std::pair<std::size_t, double>> kl_history;  // (iteration, KL(P||Q)); includes 0 and the last
  std::vector<double> point_perplexity;                   // achieved per-point perplexity
};

// Exact O(n^2) t-SNE.
TsneResult tsne_embed(const DenseMatrix& z, const TsneConfig& cfg = {});

// Row-conditional Gaussian affinities p_{j|i} from squared distances; each row's
// bandwidth is bisected until its entropy matches log(perplexity).
DenseMatrix conditional_affinities(const DenseMatrix& sq_dists, double perplexity,
                                   std::vector<double>* achieved_perplexity = nullptr);

// Symmetrized joint P = (P_cond + P_cond^T) / (2n).
DenseMatrix joint_affinities(const DenseMatrix& z, double perplexity, std::vector<double>* achieved_perplexity = nullptr);

double tsne_kl(const DenseMatrix& p, const DenseMatrix& y);
DenseMatrix tsne_gradient(const DenseMatrix& p, const DenseMatrix& y);

// Projection onto the top `dims` principal components (centered input).
DenseMatrix pca_reduce(const DenseMatrix& z, std::size_t dims);

enum class SnapshotVariant { desired, noisy, denoised };
std::string to_string(SnapshotVariant v);

struct EmbeddingSnapshot {
  int tap = 0;
  SnapshotVariant variant = SnapshotVariant::desired;
  DenseMatrix coords;
  std::vector<int> labels;
  int n_x = 0;
  int n_a = 0;
  std::string x_kind;
  std::string a_kind;
};

// "tap,variant,x,y,label" rows.
std::string snapshots_csv(std::span<const EmbeddingSnapshot> snaps);
// Inverse of snapshots_csv; rows are grouped by (tap, variant) in file order.
std::vector<EmbeddingSnapshot> parse_snapshots_csv(const std::string& text);

}  // namespace gsr
