#pragma once

#include <span>
#include <vector>

#include "gsr/dense_matrix.hpp"
#include "gsr/graph.hpp"

namespace gsr {

// Row-wise argmax; ties resolve to the lowest class index.
std::vector<int> argmax_rows(const DenseMatrix& scores);

// Fraction of nodes in `mask` whose prediction equals the label.
double accuracy(std::span<const int> predictions, std::span<const int> labels, std::span<const NodeId> mask);

}  // namespace gsr
