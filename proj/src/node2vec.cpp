#include "gsr/node2vec.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "gsr/io.hpp"
#include "gsr/rng.hpp"

namespace gsr {

void WalkConfig::validate() const {
  if (!(p > 0.0) || !(q > 0.0)) throw ArgumentError("WalkConfig: p and q must be positive");
  if (walk_length < 2) throw ArgumentError("WalkConfig: walk_length must be >= 2");
  if (embedding_dim < 1) throw ArgumentError("WalkConfig: embedding_dim must be >= 1");
}

WalkSet generate_walks(const Graph& g, const WalkConfig& cfg) {
  cfg.validate();
  const CsrMatrix adj = symmetrized_adjacency(g, false);
  WalkSet out;
  out.num_nodes = g.num_nodes;
  std::vector<NodeId> starts;
  for (std::size_t v = 0; v < adj.n; ++v) {
    if (adj.offsets[v + 1] == adj.offsets[v])
      out.skipped.push_back(static_cast<NodeId>(v));
    else
      starts.push_back(static_cast<NodeId>(v));
  }
  out.walks.resize(starts.size() * cfg.walks_per_node);

  const auto total = static_cast<std::ptrdiff_t>(out.walks.size());
#pragma omp parallel for schedule(dynamic, 32)
  for (std::ptrdiff_t idx = 0; idx < total; ++idx) {
    const auto rep = static_cast<std::size_t>(idx) / starts.size();
    const NodeId start = starts[static_cast<std::size_t>(idx) % starts.size()];
    Rng rng = make_rng(cfg.seed, {start, rep});
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Walk walk{start};
    walk.reserve(cfg.walk_length);
    std::vector<double> weights;
    while (walk.size() < cfg.walk_length) {
      const NodeId cur = walk.back();
      auto nbrs = adj.row_cols(cur);
      if (nbrs.empty()) break;
      if (walk.size() == 1) {
        walk.push_back(nbrs[static_cast<std::size_t>(unif(rng) * static_cast<double>(nbrs.size())) % nbrs.size()]);
        continue;
      }
      const NodeId prev = walk[walk.size() - 2];
      auto prev_nbrs = adj.row_cols(prev);
      weights.resize(nbrs.size());
      double total_w = 0.0;
      for (std::size_t i = 0; i < nbrs.size(); ++i) {
        const NodeId x = nbrs[i];
        double w;
        if (x == prev)
          w = 1.0 / cfg.p;
        else if (std::binary_search(prev_nbrs.begin(), prev_nbrs.end(), x))
          w = 1.0;
        else
          w = 1.0 / cfg.q;
        weights[i] = w;
        total_w += w;
      }
      double r = unif(rng) * total_w;
      std::size_t pick = nbrs.size() - 1;
      for (std::size_t i = 0; i < nbrs.size(); ++i) {
        r -= weights[i];
        if (r < 0.0) {
          pick = i;
          break;
        }
      }
      walk.push_back(nbrs[pick]);
    }
    out.walks[static_cast<std::size_t>(idx)] = std::move(walk);
  }
  return out;
}

namespace {
double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}
}  // namespace

DenseMatrix train_skipgram(const WalkSet& walks, const WalkConfig& cfg) {
  cfg.validate();
  if (walks.walks.empty()) throw ArgumentError("train_skipgram: no walks");
  const std::size_t n = walks.num_nodes;
  const std::size_t d = cfg.embedding_dim;

  std::vector<double> counts(n, 0.0);
  for (const auto& w : walks.walks)
    for (auto v : w) counts[v] += 1.0;

  Rng rng = make_rng(cfg.seed, {0x5e});
  DenseMatrix in(n, d);
  {
    std::uniform_real_distribution<double> u(-0.5 / static_cast<double>(d), 0.5 / static_cast<double>(d));
    for (double& v : in.values()) v = u(rng);
    for (std::size_t v = 0; v < n; ++v)
      if (counts[v] == 0.0) std::fill(in.row(v).begin(), in.row(v).end(), 0.0);
  }
  DenseMatrix out(n, d);

  std::vector<double> noise_weights(n);
  for (std::size_t v = 0; v < n; ++v) noise_weights[v] = std::pow(counts[v], 0.75);
  std::discrete_distribution<std::size_t> noise(noise_weights.begin(), noise_weights.end());

  std::vector<double> grad_in(d);
  auto update = [&](std::size_t center, std::size_t target, double label) {
    auto ci = in.row(center);
    auto to = out.row(target);
    double dot = 0.0;
    for (std::size_t k = 0; k < d; ++k) dot += ci[k] * to[k];
    const double g = (label - sigmoid(dot)) * cfg.lr;
    for (std::size_t k = 0; k < d; ++k) {
      grad_in[k] += g * to[k];
      to[k] += g * ci[k];
    }
  };

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (const auto& walk : walks.walks) {
      for (std::size_t i = 0; i < walk.size(); ++i) {
        const std::size_t lo = i >= cfg.window ? i - cfg.window : 0;
        const std::size_t hi = std::min(walk.size() - 1, i + cfg.window);
        for (std::size_t j = lo; j <= hi; ++j) {
          if (j == i) continue;
          const std::size_t center = walk[i];
          const std::size_t context = walk[j];
          std::fill(grad_in.begin(), grad_in.end(), 0.0);
          update(center, context, 1.0);
          for (std::size_t k = 0; k < cfg.negatives; ++k) {
            const std::size_t neg = noise(rng);
            if (neg == context) continue;
            update(center, neg, 0.0);
          }
          auto ci = in.row(center);
          for (std::size_t k = 0; k < d; ++k) ci[k] += grad_in[k];
        }
      }
    }
  }
  return in;
}

DenseMatrix compose_features(const DenseMatrix& x, const DenseMatrix& e) {
  if (x.rows() != e.rows())
    throw DimensionError("compose_features: " + std::to_string(x.rows()) + " feature rows vs " +
                         std::to_string(e.rows()) + " embedding rows");
  return hconcat(x, e);
}

void save_embeddings(const DenseMatrix& e, const std::filesystem::path& path) {
  io::BinaryWriter w;
  w.put_magic("GSRE");
  w.put<std::uint32_t>(1);
  w.put_matrix(e);
  io::write_file_atomic(path, w.bytes());
}

DenseMatrix load_embeddings(const std::filesystem::path& path) {
  io::BinaryReader r(io::read_file(path), path.string());
  r.expect_magic("GSRE");
  if (r.get<std::uint32_t>("version") != 1) r.fail("version", "unsupported version");
  DenseMatrix e = r.get_matrix("embeddings");
  if (!r.at_end()) r.fail("trailer", "unexpected trailing bytes");
  return e;
}

}  // namespace gsr
