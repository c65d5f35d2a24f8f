#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gsr/dense_matrix.hpp"
#include "gsr/graph.hpp"

namespace gsr {

enum class NoiseKind { Xc, Xz, Ac, Az };
enum class PoolPolicy { train_only, train_val, any };

std::string to_string(NoiseKind k);
NoiseKind parse_noise_kind(const std::string& s);
std::string to_string(PoolPolicy p);
PoolPolicy parse_pool_policy(const std::string& s);
std::string to_string(Split s);
Split parse_split(const std::string& s);

struct NoiseSpec {
  NoiseKind kind = NoiseKind::Xc;
  int percent = 0;  // multiple of 10 in [0, 100]
  PoolPolicy pool = PoolPolicy::any;
  Split target_split = Split::test;
  std::uint64_t seed = 0;

  void validate() const;
};

// floor(percent / 100 * total), computed exactly in integers.
std::size_t distortion_count(std::size_t total, int percent);

// Adds U[0, 1) to exactly distortion_count(|rows| * cols, percent) entries of
// the target rows, chosen uniformly without replacement.
DenseMatrix corrupt_features(const DenseMatrix& x, std::span<const NodeId> rows, int percent, std::uint64_t seed);

// As corrupt_features, but the chosen entries are set to zero.
DenseMatrix blank_features(const DenseMatrix& x, std::span<const NodeId> rows, int percent, std::uint64_t seed);

// Selects distortion_count(|targets|, percent) target nodes; every edge incident
// to a selected node keeps that node and gets its other endpoint redrawn from
// `pool` (never the kept node itself unless the pool offers nothing else).
Graph corrupt_adjacency(const Graph& g, std::span<const NodeId> targets, int percent, std::span<const NodeId> pool,
                        std::uint64_t seed);

// Removes distortion_count(|target_edges|, percent) of the listed edge indices.
Graph blank_adjacency(const Graph& g, std::span<const std::size_t> target_edges, int percent, std::uint64_t seed);

// Indices (CSR order) of edges with at least one endpoint in `nodes`.
std::vector<std::size_t> incident_edges(const Graph& g, std::span<const NodeId> nodes);

// Candidate replacement endpoints for adjacency rewiring.
std::vector<NodeId> rewire_pool(const Graph& g, PoolPolicy policy);

// Pool policy for a dataset/split pair: date-split datasets may only rewire
// toward earlier splits; everything else draws from all nodes.
PoolPolicy default_pool_policy(const std::string& dataset, Split target);

// Applies one operator to the target split of `g`.
Graph apply_noise(const Graph& g, const NoiseSpec& spec);

}  // namespace gsr
