#include "gsr/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "gsr/io.hpp"
#include "gsr/rng.hpp"

namespace gsr {

namespace {
constexpr std::uint32_t kGraphVersion = 1;
}

const std::vector<NodeId>& SplitMasks::of(Split s) const {
  switch (s) {
    case Split::train:
      return train;
    case Split::val:
      return val;
    case Split::test:
      return test;
  }
  throw ArgumentError("unknown split");
}

std::vector<Edge> Graph::edge_list() const {
  std::vector<Edge> out;
  out.reserve(num_edges());
  for (std::size_t v = 0; v < num_nodes; ++v)
    for (std::size_t e = csr_offsets[v]; e < csr_offsets[v + 1]; ++e)
      out.push_back({static_cast<NodeId>(v), csr_targets[e]});
  return out;
}

void Graph::set_edges(std::span<const Edge> edges) {
  csr_offsets.assign(num_nodes + 1, 0);
  for (const auto& e : edges) {
    if (e.src >= num_nodes || e.dst >= num_nodes) throw IntegrityError("edge endpoint out of range");
    ++csr_offsets[e.src + 1];
  }
  for (std::size_t i = 0; i < num_nodes; ++i) csr_offsets[i + 1] += csr_offsets[i];
  csr_targets.assign(edges.size(), 0);
  std::vector<std::size_t> cursor(csr_offsets.begin(), csr_offsets.end() - 1);
  for (const auto& e : edges) csr_targets[cursor[e.src]++] = e.dst;
}

void Graph::validate() const {
  if (csr_offsets.size() != num_nodes + 1) throw IntegrityError("csr_offsets must have num_nodes+1 entries");
  if (csr_offsets.front() != 0) throw IntegrityError("csr_offsets[0] must be 0");
  for (std::size_t i = 0; i < num_nodes; ++i)
    if (csr_offsets[i + 1] < csr_offsets[i]) throw IntegrityError("csr_offsets must be non-decreasing");
  if (csr_offsets.back() != csr_targets.size()) throw IntegrityError("csr_offsets[num_nodes] != edge count");
  for (auto t : csr_targets)
    if (t >= num_nodes) throw IntegrityError("edge target " + std::to_string(t) + " out of range");
  if (features.rows() != num_nodes) throw IntegrityError("feature rows != num_nodes");
  if (!features.all_finite()) throw IntegrityError("features contain non-finite values");
  if (labels.size() != num_nodes) throw IntegrityError("labels length != num_nodes");
  for (int l : labels)
    if (l < 0 || l >= num_classes) throw IntegrityError("label " + std::to_string(l) + " outside [0, num_classes)");
  std::vector<std::uint8_t> seen(num_nodes, 0);
  for (const auto* part : {&split.train, &split.val, &split.test}) {
    for (auto v : *part) {
      if (v >= num_nodes) throw IntegrityError("split node " + std::to_string(v) + " out of range");
      if (seen[v]) throw IntegrityError("split masks overlap at node " + std::to_string(v));
      seen[v] = 1;
    }
  }
}

GraphFormat parse_graph_format(const std::string& name) {
  if (name == "wikics-json") return GraphFormat::wikics_json;
  if (name == "ogb-dir") return GraphFormat::ogb_dir;
  if (name == "native-binary") return GraphFormat::native_binary;
  throw ArgumentError("unknown graph format '" + name + "'");
}

// Loaders live in graph_loaders.cpp.
Graph load_wikics_json(const std::filesystem::path& path);
Graph load_ogb_dir(const std::filesystem::path& path);

Graph load_graph(const std::filesystem::path& path, GraphFormat format) {
  if (!std::filesystem::exists(path)) throw IoError("no such file or directory: " + path.string());
  Graph g;
  switch (format) {
    case GraphFormat::wikics_json:
      g = load_wikics_json(path);
      break;
    case GraphFormat::ogb_dir:
      g = load_ogb_dir(path);
      break;
    case GraphFormat::native_binary:
      g = decode_graph(io::read_file(path), path.string());
      break;
  }
  g.validate();
  return g;
}

std::vector<std::uint8_t> encode_graph(const Graph& g) {
  io::BinaryWriter w;
  w.put_magic("GSR1");
  w.put<std::uint32_t>(kGraphVersion);
  w.put<std::uint64_t>(g.num_nodes);
  w.put<std::uint8_t>(g.directed ? 1 : 0);
  std::vector<std::uint64_t> offsets(g.csr_offsets.begin(), g.csr_offsets.end());
  w.put_array<std::uint64_t>(offsets);
  w.put_array<NodeId>(g.csr_targets);
  w.put_matrix(g.features);
  w.put<std::int32_t>(g.num_classes);
  std::vector<std::int32_t> labels(g.labels.begin(), g.labels.end());
  w.put_array<std::int32_t>(labels);
  w.put_array<NodeId>(g.split.train);
  w.put_array<NodeId>(g.split.val);
  w.put_array<NodeId>(g.split.test);
  return w.bytes();
}

Graph decode_graph(std::vector<std::uint8_t> bytes, const std::string& source) {
  io::BinaryReader r(std::move(bytes), source);
  r.expect_magic("GSR1");
  const auto version = r.get<std::uint32_t>("version");
  if (version != kGraphVersion) r.fail("version", "unsupported version " + std::to_string(version));
  Graph g;
  g.num_nodes = r.get<std::uint64_t>("num_nodes");
  g.directed = r.get<std::uint8_t>("directed") != 0;
  auto offsets = r.get_array<std::uint64_t>("csr_offsets");
  g.csr_offsets.assign(offsets.begin(), offsets.end());
  g.csr_targets = r.get_array<NodeId>("csr_targets");
  g.features = r.get_matrix("features");
  g.num_classes = r.get<std::int32_t>("num_classes");
  auto labels = r.get_array<std::int32_t>("labels");
  g.labels.assign(labels.begin(), labels.end());
  g.split.train = r.get_array<NodeId>("split.train");
  g.split.val = r.get_array<NodeId>("split.val");
  g.split.test = r.get_array<NodeId>("split.test");
  if (!r.at_end()) r.fail("trailer", "unexpected trailing bytes");
  g.validate();
  return g;
}

void save_graph(const Graph& g, const std::filesystem::path& path) {
  g.validate();
  io::write_file_atomic(path, encode_graph(g));
}

std::uint64_t graph_hash(const Graph& g) { return io::fnv1a(encode_graph(g)); }

Graph generate_sbm_graph(const SbmParams& p) {
  if (p.num_classes <= 0) throw ArgumentError("num_classes must be positive");
  if (static_cast<std::size_t>(p.num_classes) > p.num_nodes)
    throw ArgumentError("num_classes (" + std::to_string(p.num_classes) + ") exceeds num_nodes (" +
                        std::to_string(p.num_nodes) + ")");
  if (!(0.0 <= p.p_out && p.p_out <= p.p_in && p.p_in <= 1.0))
    throw ArgumentError("SBM probabilities must satisfy 0 <= p_out <= p_in <= 1");

  Graph g;
  g.num_nodes = p.num_nodes;
  g.num_classes = p.num_classes;
  g.directed = true;
  const std::size_t block = p.num_nodes / static_cast<std::size_t>(p.num_classes);
  g.labels.resize(p.num_nodes);
  for (std::size_t i = 0; i < p.num_nodes; ++i)
    g.labels[i] = static_cast<int>(std::min<std::size_t>(i / block, static_cast<std::size_t>(p.num_classes - 1)));

  Rng edge_rng = make_rng(p.seed, {1});
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<Edge> edges;
  for (std::size_t u = 0; u < p.num_nodes; ++u) {
    for (std::size_t v = 0; v < p.num_nodes; ++v) {
      if (u == v) continue;
      const double prob = g.labels[u] == g.labels[v] ? p.p_in : p.p_out;
      // Draw unconditionally so the stream layout does not depend on probabilities.
      const double draw = unif(edge_rng);
      if (draw < prob) edges.push_back({static_cast<NodeId>(u), static_cast<NodeId>(v)});
    }
  }
  g.set_edges(edges);

  Rng feat_rng = make_rng(p.seed, {2});
  std::normal_distribution<double> normal(0.0, 1.0);
  g.features = DenseMatrix(p.num_nodes, p.feature_dim);
  for (std::size_t i = 0; i < p.num_nodes; ++i)
    for (std::size_t j = 0; j < p.feature_dim; ++j) {
      const bool on = static_cast<int>(j % static_cast<std::size_t>(p.num_classes)) == g.labels[i];
      g.features(i, j) = normal(feat_rng) + (on ? p.feature_shift : 0.0);
    }

  std::vector<NodeId> order(p.num_nodes);
  std::iota(order.begin(), order.end(), NodeId{0});
  Rng split_rng = make_rng(p.seed, {3});
  std::shuffle(order.begin(), order.end(), split_rng);
  const std::size_t n_train = p.num_nodes * 6 / 10;
  const std::size_t n_val = p.num_nodes * 2 / 10;
  g.split.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  g.split.val.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train),
                     order.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
  g.split.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), order.end());
  for (auto* part : {&g.split.train, &g.split.val, &g.split.test}) std::sort(part->begin(), part->end());
  g.validate();
  return g;
}

CsrMatrix symmetrized_adjacency(const Graph& g, bool add_self_loops) {
  std::vector<std::vector<std::uint32_t>> adj(g.num_nodes);
  for (std::size_t u = 0; u < g.num_nodes; ++u) {
    for (auto v : g.out_neighbors(static_cast<NodeId>(u))) {
      adj[u].push_back(v);
      if (v != u) adj[v].push_back(static_cast<std::uint32_t>(u));
    }
    if (add_self_loops) adj[u].push_back(static_cast<std::uint32_t>(u));
  }
  CsrMatrix a;
  a.n = g.num_nodes;
  a.offsets.assign(g.num_nodes + 1, 0);
  for (std::size_t u = 0; u < g.num_nodes; ++u) {
    auto& row = adj[u];
    std::sort(row.begin(), row.end());
    row.erase(std::unique(row.begin(), row.end()), row.end());
    a.cols.insert(a.cols.end(), row.begin(), row.end());
    a.offsets[u + 1] = a.cols.size();
  }
  a.weights.assign(a.cols.size(), 1.0);
  return a;
}

CsrMatrix normalize_adjacency(const Graph& g, bool add_self_loops) {
  CsrMatrix a = symmetrized_adjacency(g, add_self_loops);
  std::vector<double> inv_sqrt_deg(a.n, 0.0);
  for (std::size_t u = 0; u < a.n; ++u) {
    const auto deg = static_cast<double>(a.offsets[u + 1] - a.offsets[u]);
    if (deg > 0) inv_sqrt_deg[u] = 1.0 / std::sqrt(deg);
  }
  for (std::size_t u = 0; u < a.n; ++u)
    for (std::size_t e = a.offsets[u]; e < a.offsets[u + 1]; ++e)
      a.weights[e] = inv_sqrt_deg[u] * inv_sqrt_deg[a.cols[e]];
  return a;
}

CsrMatrix mean_aggregator(const Graph& g) {
  CsrMatrix a = symmetrized_adjacency(g, false);
  for (std::size_t u = 0; u < a.n; ++u) {
    const auto deg = a.offsets[u + 1] - a.offsets[u];
    for (std::size_t e = a.offsets[u]; e < a.offsets[u + 1]; ++e) a.weights[e] = 1.0 / static_cast<double>(deg);
  }
  return a;
}

std::vector<NodeId> isolated_nodes(const Graph& g) {
  std::vector<std::uint8_t> touched(g.num_nodes, 0);
  for (std::size_t u = 0; u < g.num_nodes; ++u)
    for (auto v : g.out_neighbors(static_cast<NodeId>(u))) {
      touched[u] = 1;
      touched[v] = 1;
    }
  std::vector<NodeId> out;
  for (std::size_t u = 0; u < g.num_nodes; ++u)
    if (!touched[u]) out.push_back(static_cast<NodeId>(u));
  return out;
}

}  // namespace gsr
