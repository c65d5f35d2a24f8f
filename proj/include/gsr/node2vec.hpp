#pragma once

#include <cstdint>
#include <vector>

#include "gsr/dense_matrix.hpp"
#include "gsr/graph.hpp"

namespace gsr {

struct WalkConfig {
  std::size_t walks_per_node = 10;
  std::size_t walk_length = 40;
  double p = 1.0;  // return parameter
  double q = 1.0;  // in-out parameter
  std::size_t window = 5;
  std::size_t embedding_dim = 64;
  std::size_t negatives = 5;
  std::size_t epochs = 1;
  double lr = 0.025;
  std::uint64_t seed = 0;

  void validate() const;
};

using Walk = std::vector<NodeId>;

struct WalkSet {
  std::size_t num_nodes = 0;
  std::vector<Walk> walks;
  std::vector<NodeId> skipped;  // isolated nodes that produced no walks
};

// Second-order biased walks over the symmetrized graph. Walks are ordered by
// (repetition, start node); each walk draws from its own derived seed.
WalkSet generate_walks(const Graph& g, const WalkConfig& cfg);

// Skip-gram with negative sampling over windowed co-occurrences.
// Rows of nodes absent from every walk are zero.
DenseMatrix train_skipgram(const WalkSet& walks, const WalkConfig& cfg);

// [X | E]
DenseMatrix compose_features(const DenseMatrix& x, const DenseMatrix& e);

// Persist a bare embedding matrix (magic "GSRE").
void save_embeddings(const DenseMatrix& e, const std::filesystem::path& path);
DenseMatrix load_embeddings(const std::filesystem::path& path);

}  // namespace gsr
