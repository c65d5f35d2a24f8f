#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "gsr/dense_matrix.hpp"
#include "gsr/rng.hpp"

namespace gsr {

// Gaussian-Bernoulli RBM with parameters (b_v, sigma, W, b_h).
//   E(v, h) = sum_i (v_i - b_v_i)^2 / (2 sigma_i^2)
//           - sum_ij (v_i / sigma_i) W_ij h_j - sum_j b_h_j h_j
struct GbRbm {
  DenseMatrix weight;  // |V| x |H|
  Vector visible_bias;
  Vector hidden_bias;
  Vector sigma;

  std::size_t num_visible() const { return weight.rows(); }
  std::size_t num_hidden() const { return weight.cols(); }
  void validate() const;
  bool operator==(const GbRbm&) const = default;

  // W ~ Normal(0, weight_std), zero biases, unit sigma.
  static GbRbm init(std::size_t visible, std::size_t hidden, std::uint64_t seed, double weight_std = 0.01);
};

// Per-dimension standardization; std is floored at 1e-6.
struct Scaler {
  static constexpr double kStdFloor = 1e-6;
  Vector mean;
  Vector std;

  static Scaler fit(const DenseMatrix& z);
  std::size_t dims() const { return mean.size(); }
  DenseMatrix transform(const DenseMatrix& z) const;
  DenseMatrix inverse(const DenseMatrix& s) const;
  bool operator==(const Scaler&) const = default;
};

struct RbmTrainConfig {
  std::size_t hidden_units = 256;
  std::size_t epochs = 50;
  std::size_t batch_size = 64;
  std::size_t cd_steps = 1;
  double lr = 0.01;
  std::uint64_t seed = 0;

  void validate() const;
  bool operator==(const RbmTrainConfig&) const = default;
};

// Overflow-safe logistic.
double logistic(double x);

double energy(const GbRbm& rbm, std::span<const double> v, std::span<const double> h);

// P(h_j = 1 | v) = logistic(b_h_j + sum_i (v_i / sigma_i) W_ij), one row per visible row.
DenseMatrix hidden_conditional(const GbRbm& rbm, const DenseMatrix& v);

// mu_i = b_v_i + sigma_i sum_j W_ij h_j
DenseMatrix visible_mean(const GbRbm& rbm, const DenseMatrix& h);

// Returns the mean when `sample` is false, else mu + sigma * N(0, 1).
DenseMatrix visible_conditional(const GbRbm& rbm, const DenseMatrix& h, bool sample, Rng& rng);

DenseMatrix sample_bernoulli(const DenseMatrix& probs, Rng& rng);

// One CD-k step on `batch` (rows are visible vectors). Intermediate visibles
// are sampled, the final one is the mean. sigma is not updated. Returns the
// mean squared reconstruction error of the final visible.
double cd_update(GbRbm& rbm, const DenseMatrix& batch, std::size_t k, double lr, Rng& rng);

struct RbmTrainResult {
  GbRbm rbm;
  Scaler scaler;
  std::vector<double> epoch_error;
};

// Fits the scaler, standardizes, and runs shuffled minibatch CD-k.
RbmTrainResult train_rbm(const DenseMatrix& z, const RbmTrainConfig& cfg);

struct ReconstructOptions {
  std::size_t gibbs_rounds = 1;
  bool sample = false;  // sample intermediate states; the final visible is always the mean
  std::uint64_t seed = 0;
};

// Standardize, alternate hidden probabilities and visibles, de-standardize.
DenseMatrix reconstruct(const GbRbm& rbm, const Scaler& scaler, const DenseMatrix& z_noisy,
                        const ReconstructOptions& opts = {});

// Versioned checkpoint, magic "GSRR".
struct RbmCheckpoint {
  GbRbm rbm;
  Scaler scaler;
  RbmTrainConfig config;
};
void save_rbm(const RbmCheckpoint& ckpt, const std::filesystem::path& path);
RbmCheckpoint load_rbm(const std::filesystem::path& path);

}  // namespace gsr
