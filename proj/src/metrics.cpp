#include "gsr/metrics.hpp"

namespace gsr {

std::vector<int> argmax_rows(const DenseMatrix& scores) {
  std::vector<int> out(scores.rows(), 0);
  for (std::size_t r = 0; r < scores.rows(); ++r) {
    auto row = scores.row(r);
    std::size_t best = 0;
    for (std::size_t c = 1; c < row.size(); ++c)
      if (row[c] > row[best]) best = c;
    out[r] = static_cast<int>(best);
  }
  return out;
}

double accuracy(std::span<const int> predictions, std::span<const int> labels, std::span<const NodeId> mask) {
  if (mask.empty()) throw ArgumentError("accuracy: empty mask");
  std::size_t hits = 0;
  for (auto v : mask) {
    if (v >= predictions.size() || v >= labels.size()) throw DimensionError("accuracy: mask node out of range");
    if (predictions[v] == labels[v]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(mask.size());
}

}  // namespace gsr
