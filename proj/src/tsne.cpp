#include "gsr/tsne.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <sstream>

#include "gsr/kernels.hpp"
#include "gsr/rng.hpp"

namespace gsr {

namespace {
constexpr double kEntropyTol = 1e-7;
constexpr int kMaxBisection = 200;
constexpr double kTiny = 1e-300;
}  // namespace

DenseMatrix conditional_affinities(const DenseMatrix& sq_dists, double perplexity,
                                   std::vector<double>* achieved_perplexity) {
  const std::size_t n = sq_dists.rows();
  DenseMatrix p(n, n);
  std::vector<double> achieved(n, 0.0);
  const double target = std::log(perplexity);
  const auto rows = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(dynamic, 8)
  for (std::ptrdiff_t ii = 0; ii < rows; ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    double dmin = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j)
      if (j != i) dmin = std::min(dmin, sq_dists(i, j));
    double beta = 1.0;
    double lo = 0.0;
    double hi = std::numeric_limits<double>::infinity();
    double entropy = 0.0;
    auto row = p.row(i);
    for (int it = 0; it < kMaxBisection; ++it) {
      double sum = 0.0;
      double wsum = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) {
          row[j] = 0.0;
          continue;
        }
        const double d = sq_dists(i, j) - dmin;
        row[j] = std::exp(-beta * d);
        sum += row[j];
        wsum += d * row[j];
      }
      entropy = std::log(sum) + beta * wsum / sum;
      for (std::size_t j = 0; j < n; ++j) row[j] /= sum;
      const double diff = entropy - target;
      if (std::abs(diff) < kEntropyTol) break;
      if (diff > 0) {
        lo = beta;
        beta = std::isinf(hi) ? beta * 2.0 : 0.5 * (beta + hi);
      } else {
        hi = beta;
        beta = 0.5 * (beta + lo);
      }
    }
    achieved[i] = std::exp(entropy);
  }
  if (achieved_perplexity != nullptr) *achieved_perplexity = std::move(achieved);
  return p;
}

DenseMatrix joint_affinities(const DenseMatrix& z, double perplexity, std::vector<double>* achieved_perplexity) {
  const DenseMatrix cond = conditional_affinities(kernels::pairwise_sq_distances(z), perplexity, achieved_perplexity);
  const std::size_t n = z.rows();
  DenseMatrix p(n, n);
  const double scale = 1.0 / (2.0 * static_cast<double>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) p(i, j) = (cond(i, j) + cond(j, i)) * scale;
  return p;
}

namespace {

// Unnormalized Student-t kernel w_ij = 1 / (1 + |y_i - y_j|^2) and its sum.
DenseMatrix student_t(const DenseMatrix& y, double& total) {
  DenseMatrix w = kernels::pairwise_sq_distances(y);
  total = 0.0;
  for (std::size_t i = 0; i < w.rows(); ++i)
    for (std::size_t j = 0; j < w.cols(); ++j) {
      w(i, j) = i == j ? 0.0 : 1.0 / (1.0 + w(i, j));
      total += w(i, j);
    }
  return w;
}

}  // namespace

double tsne_kl(const DenseMatrix& p, const DenseMatrix& y) {
  double total = 0.0;
  const DenseMatrix w = student_t(y, total);
  double kl = 0.0;
  for (std::size_t i = 0; i < p.rows(); ++i)
    for (std::size_t j = 0; j < p.cols(); ++j) {
      if (i == j || p(i, j) <= 0.0) continue;
      const double q = std::max(w(i, j) / total, kTiny);
      kl += p(i, j) * std::log(p(i, j) / q);
    }
  return kl;
}

DenseMatrix tsne_gradient(const DenseMatrix& p, const DenseMatrix& y) {
  double total = 0.0;
  const DenseMatrix w = student_t(y, total);
  const std::size_t n = y.rows();
  const std::size_t d = y.cols();
  DenseMatrix g(n, d);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const double mult = 4.0 * (p(i, j) - w(i, j) / total) * w(i, j);
      for (std::size_t k = 0; k < d; ++k) g(i, k) += mult * (y(i, k) - y(j, k));
    }
  return g;
}

DenseMatrix pca_reduce(const DenseMatrix& z, std::size_t dims) {
  if (dims >= z.cols()) return z;
  using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  Eigen::Map<const Mat> x(z.data(), static_cast<Eigen::Index>(z.rows()), static_cast<Eigen::Index>(z.cols()));
  const Mat centered = x.rowwise() - x.colwise().mean();
  const Eigen::MatrixXd cov = (centered.transpose() * centered) / std::max<double>(1.0, static_cast<double>(z.rows()) - 1.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  // Eigenvalues come back ascending; keep the trailing columns.
  const Eigen::MatrixXd basis = eig.eigenvectors().rightCols(static_cast<Eigen::Index>(dims)).rowwise().reverse();
  const Mat proj = centered * basis;
  DenseMatrix out(z.rows(), dims);
  Eigen::Map<Mat>(out.data(), static_cast<Eigen::Index>(z.rows()), static_cast<Eigen::Index>(dims)) = proj;
  return out;
}

TsneResult tsne_embed(const DenseMatrix& z, const TsneConfig& cfg) {
  if (cfg.perplexity < 2.0) throw ArgumentError("tsne: perplexity must be >= 2");
  if (static_cast<double>(z.rows()) < 3.0 * cfg.perplexity)
    throw ArgumentError("tsne: perplexity " + std::to_string(cfg.perplexity) + " too large for " +
                        std::to_string(z.rows()) + " points (need rows >= 3 * perplexity)");
  const DenseMatrix x = z.cols() > cfg.pca_dims ? pca_reduce(z, cfg.pca_dims) : z;
  TsneResult res;
  const DenseMatrix p = joint_affinities(x, cfg.perplexity, &res.point_perplexity);
  const std::size_t n = x.rows();

  DenseMatrix y(n, 2);
  {
    Rng rng = make_rng(cfg.seed, {0x75e});
    std::normal_distribution<double> nd(0.0, 1e-4);
    for (double& v : y.values()) v = nd(rng);
  }
  DenseMatrix velocity(n, 2);
  DenseMatrix gains(n, 2, 1.0);
  DenseMatrix p_exag = p;
  for (double& v : p_exag.values()) v *= cfg.early_exaggeration;

  res.kl_history.emplace_back(0, tsne_kl(p, y));
  for (std::size_t it = 0; it < cfg.iterations; ++it) {
    const bool exaggerate = it < cfg.exaggeration_iters;
    const DenseMatrix grad = tsne_gradient(exaggerate ? p_exag : p, y);
    const double momentum = it < cfg.momentum_switch ? cfg.initial_momentum : cfg.final_momentum;
    // Fresh gains and velocity when the exaggeration phase ends.
    if (it == cfg.exaggeration_iters && it > 0) {
      velocity.fill(0.0);
      gains.fill(1.0);
    }
    for (std::size_t i = 0; i < y.size(); ++i) {
      double& gain = gains.values()[i];
      const double g = grad.values()[i];
      double& vel = velocity.values()[i];
      gain = vel * g < 0.0 ? gain + 0.2 : gain * 0.8;
      gain = std::max(gain, 0.01);
      vel = momentum * vel - cfg.learning_rate * gain * g;
      y.values()[i] += vel;
    }
    for (std::size_t k = 0; k < 2; ++k) {
      double mean = 0.0;
      for (std::size_t i = 0; i < n; ++i) mean += y(i, k);
      mean /= static_cast<double>(n);
      for (std::size_t i = 0; i < n; ++i) y(i, k) -= mean;
    }
    const std::size_t done = it + 1;
    if ((cfg.kl_every > 0 && done % cfg.kl_every == 0) || done == cfg.iterations)
      res.kl_history.emplace_back(done, tsne_kl(p, y));
  }
  if (!y.all_finite()) throw NumericError("tsne: embedding diverged");
  res.coords = std::move(y);
  return res;
}

std::string to_string(SnapshotVariant v) {
  switch (v) {
    case SnapshotVariant::desired:
      return "desired";
    case SnapshotVariant::noisy:
      return "noisy";
    case SnapshotVariant::denoised:
      return "denoised";
  }
  return "?";
}

std::string snapshots_csv(std::span<const EmbeddingSnapshot> snaps) {
  std::string out = "tap,variant,x,y,label\n";
  char buf[128];
  for (const auto& s : snaps) {
    if (s.coords.rows() != s.labels.size()) throw DimensionError("snapshot: coords rows != label count");
    const std::string variant = to_string(s.variant);
    for (std::size_t i = 0; i < s.coords.rows(); ++i) {
      std::snprintf(buf, sizeof(buf), "%d,%s,%.6g,%.6g,%d\n", s.tap, variant.c_str(), s.coords(i, 0),
                    s.coords(i, 1), s.labels[i]);
      out += buf;
    }
  }
  return out;
}

std::vector<EmbeddingSnapshot> parse_snapshots_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "tap,variant,x,y,label") throw ParseError("snapshots csv: bad header");
  struct Acc {
    EmbeddingSnapshot snap;
    std::vector<double> xy;
  };
  std::vector<Acc> groups;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string f[5];
    for (auto& field : f)
      if (!std::getline(ls, field, ',')) throw ParseError("snapshots csv: line " + std::to_string(lineno) + ": too few fields");
    SnapshotVariant variant;
    if (f[1] == "desired")
      variant = SnapshotVariant::desired;
    else if (f[1] == "noisy")
      variant = SnapshotVariant::noisy;
    else if (f[1] == "denoised")
      variant = SnapshotVariant::denoised;
    else
      throw ParseError("snapshots csv: line " + std::to_string(lineno) + ": unknown variant '" + f[1] + "'");
    int tap = 0;
    int label = 0;
    double x = 0;
    double y = 0;
    try {
      tap = std::stoi(f[0]);
      x = std::stod(f[2]);
      y = std::stod(f[3]);
      label = std::stoi(f[4]);
    } catch (const std::exception&) {
      throw ParseError("snapshots csv: line " + std::to_string(lineno) + ": bad number");
    }
    if (groups.empty() || groups.back().snap.tap != tap || groups.back().snap.variant != variant) {
      groups.emplace_back();
      groups.back().snap.tap = tap;
      groups.back().snap.variant = variant;
    }
    groups.back().xy.push_back(x);
    groups.back().xy.push_back(y);
    groups.back().snap.labels.push_back(label);
  }
  std::vector<EmbeddingSnapshot> out;
  for (auto& g : groups) {
    g.snap.coords = DenseMatrix(g.snap.labels.size(), 2, std::move(g.xy));
    out.push_back(std::move(g.snap));
  }
  return out;
}

}  // namespace gsr
