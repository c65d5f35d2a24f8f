#include "gsr/distortion.hpp"

#include <algorithm>
#include <iterator>
#include <numeric>
#include <random>

#include "gsr/rng.hpp"

namespace gsr {

std::string to_string(NoiseKind k) {
  switch (k) {
    case NoiseKind::Xc:
      return "Xc";
    case NoiseKind::Xz:
      return "Xz";
    case NoiseKind::Ac:
      return "Ac";
    case NoiseKind::Az:
      return "Az";
  }
  return "?";
}

NoiseKind parse_noise_kind(const std::string& s) {
  if (s == "Xc" || s == "xc") return NoiseKind::Xc;
  if (s == "Xz" || s == "xz") return NoiseKind::Xz;
  if (s == "Ac" || s == "ac") return NoiseKind::Ac;
  if (s == "Az" || s == "az") return NoiseKind::Az;
  throw ArgumentError("unknown noise kind '" + s + "'");
}

std::string to_string(PoolPolicy p) {
  switch (p) {
    case PoolPolicy::train_only:
      return "train-only";
    case PoolPolicy::train_val:
      return "train+val";
    case PoolPolicy::any:
      return "any";
  }
  return "?";
}

PoolPolicy parse_pool_policy(const std::string& s) {
  if (s == "train-only") return PoolPolicy::train_only;
  if (s == "train+val") return PoolPolicy::train_val;
  if (s == "any") return PoolPolicy::any;
  throw ArgumentError("unknown pool policy '" + s + "'");
}

std::string to_string(Split s) {
  switch (s) {
    case Split::train:
      return "train";
    case Split::val:
      return "val";
    case Split::test:
      return "test";
  }
  return "?";
}

Split parse_split(const std::string& s) {
  if (s == "train") return Split::train;
  if (s == "val" || s == "valid") return Split::val;
  if (s == "test") return Split::test;
  throw ArgumentError("unknown split '" + s + "'");
}

void NoiseSpec::validate() const {
  if (percent < 0 || percent > 100 || percent % 10 != 0)
    throw ArgumentError("NoiseSpec: percent must be a multiple of 10 in [0, 100], got " + std::to_string(percent));
  if (target_split == Split::train) throw ArgumentError("NoiseSpec: the train split is never distorted");
}

std::size_t distortion_count(std::size_t total, int percent) {
  if (percent < 0 || percent > 100) throw ArgumentError("percent must lie in [0, 100]");
  return total * static_cast<std::size_t>(percent) / 100;
}

namespace {

std::vector<std::size_t> choose(std::size_t population, std::size_t k, Rng& rng) {
  std::vector<std::size_t> all(population);
  std::iota(all.begin(), all.end(), std::size_t{0});
  std::vector<std::size_t> picked;
  picked.reserve(k);
  std::sample(all.begin(), all.end(), std::back_inserter(picked), k, rng);
  return picked;
}

template <typename Op>
DenseMatrix distort_entries(const DenseMatrix& x, std::span<const NodeId> rows, int percent, std::uint64_t seed,
                            Op op) {
  for (auto r : rows)
    if (r >= x.rows()) throw DimensionError("feature distortion: target row out of range");
  DenseMatrix out = x;
  const std::size_t cols = x.cols();
  const std::size_t total = rows.size() * cols;
  const std::size_t k = distortion_count(total, percent);
  if (k == 0) return out;
  Rng rng = make_rng(seed, {0xfea7});
  for (std::size_t idx : choose(total, k, rng)) op(out(rows[idx / cols], idx % cols), rng);
  return out;
}

}  // namespace

DenseMatrix corrupt_features(const DenseMatrix& x, std::span<const NodeId> rows, int percent, std::uint64_t seed) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return distort_entries(x, rows, percent, seed, [&u](double& v, Rng& rng) { v += u(rng); });
}

DenseMatrix blank_features(const DenseMatrix& x, std::span<const NodeId> rows, int percent, std::uint64_t seed) {
  return distort_entries(x, rows, percent, seed, [](double& v, Rng&) { v = 0.0; });
}

Graph corrupt_adjacency(const Graph& g, std::span<const NodeId> targets, int percent, std::span<const NodeId> pool,
                        std::uint64_t seed) {
  if (pool.empty()) throw ArgumentError("corrupt_adjacency: empty rewiring pool");
  for (auto t : targets)
    if (t >= g.num_nodes) throw DimensionError("corrupt_adjacency: target node out of range");
  const std::size_t k = distortion_count(targets.size(), percent);
  if (k == 0) return g;

  Rng rng = make_rng(seed, {0xadc});
  std::vector<std::uint8_t> selected(g.num_nodes, 0);
  for (std::size_t idx : choose(targets.size(), k, rng)) selected[targets[idx]] = 1;

  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
  auto draw_other = [&](NodeId kept) {
    NodeId r = pool[pick(rng)];
    for (int tries = 0; r == kept && tries < 64; ++tries) r = pool[pick(rng)];
    return r;
  };

  std::vector<Edge> edges = g.edge_list();
  for (auto& e : edges) {
    if (selected[e.src])
      e.dst = draw_other(e.src);
    else if (selected[e.dst])
      e.src = draw_other(e.dst);
  }
  Graph out = g;
  out.set_edges(edges);
  return out;
}

Graph blank_adjacency(const Graph& g, std::span<const std::size_t> target_edges, int percent, std::uint64_t seed) {
  for (auto e : target_edges)
    if (e >= g.num_edges()) throw DimensionError("blank_adjacency: edge index out of range");
  const std::size_t k = distortion_count(target_edges.size(), percent);
  if (k == 0) return g;
  Rng rng = make_rng(seed, {0xadb});
  std::vector<std::uint8_t> drop(g.num_edges(), 0);
  for (std::size_t idx : choose(target_edges.size(), k, rng)) drop[target_edges[idx]] = 1;
  const std::vector<Edge> all = g.edge_list();
  std::vector<Edge> kept;
  kept.reserve(all.size() - k);
  for (std::size_t i = 0; i < all.size(); ++i)
    if (!drop[i]) kept.push_back(all[i]);
  Graph out = g;
  out.set_edges(kept);
  return out;
}

std::vector<std::size_t> incident_edges(const Graph& g, std::span<const NodeId> nodes) {
  std::vector<std::uint8_t> in(g.num_nodes, 0);
  for (auto v : nodes) in.at(v) = 1;
  std::vector<std::size_t> out;
  for (std::size_t u = 0; u < g.num_nodes; ++u)
    for (std::size_t e = g.csr_offsets[u]; e < g.csr_offsets[u + 1]; ++e)
      if (in[u] || in[g.csr_targets[e]]) out.push_back(e);
  return out;
}

std::vector<NodeId> rewire_pool(const Graph& g, PoolPolicy policy) {
  std::vector<NodeId> pool;
  switch (policy) {
    case PoolPolicy::train_only:
      pool = g.split.train;
      break;
    case PoolPolicy::train_val:
      pool = g.split.train;
      pool.insert(pool.end(), g.split.val.begin(), g.split.val.end());
      std::sort(pool.begin(), pool.end());
      break;
    case PoolPolicy::any:
      pool.resize(g.num_nodes);
      std::iota(pool.begin(), pool.end(), NodeId{0});
      break;
  }
  return pool;
}

PoolPolicy default_pool_policy(const std::string& dataset, Split target) {
  if (dataset == "ogbn-arxiv") return target == Split::val ? PoolPolicy::train_only : PoolPolicy::train_val;
  return PoolPolicy::any;
}

Graph apply_noise(const Graph& g, const NoiseSpec& spec) {
  spec.validate();
  const auto& targets = g.split.of(spec.target_split);
  Graph out;
  switch (spec.kind) {
    case NoiseKind::Xc:
      out = g;
      out.features = corrupt_features(g.features, targets, spec.percent, spec.seed);
      return out;
    case NoiseKind::Xz:
      out = g;
      out.features = blank_features(g.features, targets, spec.percent, spec.seed);
      return out;
    case NoiseKind::Ac: {
      const auto pool = rewire_pool(g, spec.pool);
      return corrupt_adjacency(g, targets, spec.percent, pool, spec.seed);
    }
    case NoiseKind::Az: {
      const auto edges = incident_edges(g, targets);
      return blank_adjacency(g, edges, spec.percent, spec.seed);
    }
  }
  throw ArgumentError("unknown noise kind");
}

}  // namespace gsr
