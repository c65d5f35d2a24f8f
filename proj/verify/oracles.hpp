#pragma once

// Independent reference computations. Deliberately naive and written without
// calling the library routines they are used to check.

#include <functional>
#include <span>
#include <vector>

#include "gsr/dense_matrix.hpp"
#include "gsr/graph.hpp"
#include "gsr/rbm.hpp"

namespace gsr::oracle {

// log p(v) for a GB-RBM by enumerating all 2^|H| hidden states; the
// partition function uses the closed-form Gaussian integral over v.
double rbm_log_likelihood(const GbRbm& rbm, std::span<const double> v);
double rbm_mean_log_likelihood(const GbRbm& rbm, const DenseMatrix& data);
double rbm_log_partition(const GbRbm& rbm);

// P(h_j = 1 | v) straight from the energy difference E(v, h_j=0) - E(v, h_j=1).
double hidden_probability(const GbRbm& rbm, std::span<const double> v, std::size_t j);

// Mean silhouette over all points (Euclidean); points in singleton clusters score 0.
double silhouette(const DenseMatrix& points, std::span<const int> labels);

// Dense D^-1/2 (A_sym + I) D^-1/2 with zero rows for zero degree.
DenseMatrix dense_normalized_adjacency(const Graph& g, bool self_loops);

DenseMatrix naive_matmul(const DenseMatrix& a, const DenseMatrix& b);

// Central finite difference of f with respect to every entry of x (x is
// perturbed in place and restored).
std::vector<double> central_differences(std::span<double> x, const std::function<double()>& f, double eps = 1e-4);

// |a - n| / max(|a|, |n|, floor).
double relative_error(double analytic, double numeric, double floor = 1e-6);

}  // namespace gsr::oracle
