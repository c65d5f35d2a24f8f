#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "gsr/dense_matrix.hpp"
#include "gsr/sparse.hpp"

namespace gsr {

using NodeId = std::uint32_t;

struct Edge {
  NodeId src;
  NodeId dst;
  bool operator==(const Edge&) const = default;
};

enum class Split { train, val, test };

struct SplitMasks {
  std::vector<NodeId> train;
  std::vector<NodeId> val;
  std::vector<NodeId> test;

  const std::vector<NodeId>& of(Split s) const;
  bool operator==(const SplitMasks&) const = default;
};

// Node-classification graph. Edges live in CSR form keyed by source node.
// When `directed` is false each stored entry stands for one undirected edge.
struct Graph {
  std::size_t num_nodes = 0;
  std::vector<std::size_t> csr_offsets{0};
  std::vector<NodeId> csr_targets;
  bool directed = true;
  DenseMatrix features;
  std::vector<int> labels;
  int num_classes = 0;
  SplitMasks split;

  std::size_t num_edges() const { return csr_targets.size(); }
  std::span<const NodeId> out_neighbors(NodeId v) const {
    return {csr_targets.data() + csr_offsets[v], csr_offsets[v + 1] - csr_offsets[v]};
  }
  std::vector<Edge> edge_list() const;

  // Replaces the edge structure; edges keep their relative order per source.
  void set_edges(std::span<const Edge> edges);

  // Throws IntegrityError when any structural invariant is broken.
  void validate() const;

  bool operator==(const Graph&) const = default;
};

enum class GraphFormat { wikics_json, ogb_dir, native_binary };

GraphFormat parse_graph_format(const std::string& name);
Graph load_graph(const std::filesystem::path& path, GraphFormat format);

// Versioned little-endian dump, magic "GSR1".
std::vector<std::uint8_t> encode_graph(const Graph& g);
Graph decode_graph(std::vector<std::uint8_t> bytes, const std::string& source = "<memory>");
void save_graph(const Graph& g, const std::filesystem::path& path);

// Content hash of the full graph encoding.
std::uint64_t graph_hash(const Graph& g);

struct SbmParams {
  std::size_t num_nodes = 600;
  int num_classes = 4;
  double p_in = 0.05;
  double p_out = 0.002;
  std::size_t feature_dim = 16;
  double feature_shift = 1.0;
  std::uint64_t seed = 7;
};

// Directed stochastic block model. Node i belongs to class
// min(i / (n / C), C - 1). Each ordered pair (u, v), u != v, carries an edge
// with probability p_in inside a block and p_out across blocks. Features are
// unit-variance Gaussians whose mean is feature_shift on the dimensions
// j with j % C == class. Splits are a seeded 60/20/20 shuffle.
Graph generate_sbm_graph(const SbmParams& params);

// Binary symmetrized adjacency (union of both directions, duplicates merged),
// optionally with the identity added.
CsrMatrix symmetrized_adjacency(const Graph& g, bool add_self_loops);

// D^-1/2 A D^-1/2 over the symmetrized adjacency; zero-degree rows stay zero.
CsrMatrix normalize_adjacency(const Graph& g, bool add_self_loops);

// Row-normalized symmetrized adjacency: row v averages over N(v).
CsrMatrix mean_aggregator(const Graph& g);

std::vector<NodeId> isolated_nodes(const Graph& g);

}  // namespace gsr
