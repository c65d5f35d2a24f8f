#pragma once

#include <atomic>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "gsr/graph.hpp"
#include "gsr/rng.hpp"

namespace gsr::test {

// Structure-only graph: one constant feature, a single class, everything in train.
inline Graph make_graph(std::size_t n, const std::vector<Edge>& edges, bool directed = true) {
  Graph g;
  g.num_nodes = n;
  g.csr_offsets.assign(n + 1, 0);
  g.directed = directed;
  g.features = DenseMatrix(n, 1, 1.0);
  g.labels.assign(n, 0);
  g.num_classes = 1;
  for (NodeId v = 0; v < n; ++v) g.split.train.push_back(v);
  g.set_edges(edges);
  return g;
}

inline DenseMatrix gaussian(std::size_t r, std::size_t c, std::uint64_t seed, double scale = 1.0) {
  Rng rng = make_rng(seed, {0x7e57});
  std::normal_distribution<double> nd(0.0, scale);
  DenseMatrix m(r, c);
  for (double& v : m.values()) v = nd(rng);
  return m;
}

class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("gsr-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace gsr::test
