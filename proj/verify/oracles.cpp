#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace gsr::oracle {

namespace {

double logsumexp(const std::vector<double>& xs) {
  double m = -std::numeric_limits<double>::infinity();
  for (double x : xs) m = std::max(m, x);
  double s = 0.0;
  for (double x : xs) s += std::exp(x - m);
  return m + std::log(s);
}

std::vector<double> hidden_state(std::size_t bits, std::size_t nh) {
  std::vector<double> h(nh);
  for (std::size_t j = 0; j < nh; ++j) h[j] = static_cast<double>((bits >> j) & 1U);
  return h;
}

// -E(v, h) written out term by term.
double neg_energy(const GbRbm& rbm, std::span<const double> v, const std::vector<double>& h) {
  double e = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double d = v[i] - rbm.visible_bias[i];
    e -= d * d / (2.0 * rbm.sigma[i] * rbm.sigma[i]);
    for (std::size_t j = 0; j < h.size(); ++j) e += v[i] / rbm.sigma[i] * rbm.weight(i, j) * h[j];
  }
  for (std::size_t j = 0; j < h.size(); ++j) e += rbm.hidden_bias[j] * h[j];
  return e;
}

}  // namespace

double rbm_log_partition(const GbRbm& rbm) {
  const std::size_t nv = rbm.num_visible();
  const std::size_t nh = rbm.num_hidden();
  if (nh > 20) throw ArgumentError("oracle: too many hidden units to enumerate");
  std::vector<double> terms;
  terms.reserve(std::size_t{1} << nh);
  for (std::size_t bits = 0; bits < (std::size_t{1} << nh); ++bits) {
    const auto h = hidden_state(bits, nh);
    double t = 0.0;
    for (std::size_t j = 0; j < nh; ++j) t += rbm.hidden_bias[j] * h[j];
    for (std::size_t i = 0; i < nv; ++i) {
      double a = 0.0;
      for (std::size_t j = 0; j < nh; ++j) a += rbm.weight(i, j) * h[j];
      t += rbm.visible_bias[i] * a / rbm.sigma[i] + a * a / 2.0;
    }
    terms.push_back(t);
  }
  double log_z = logsumexp(terms);
  for (std::size_t i = 0; i < nv; ++i) log_z += std::log(std::sqrt(2.0 * std::numbers::pi) * rbm.sigma[i]);
  return log_z;
}

double rbm_log_likelihood(const GbRbm& rbm, std::span<const double> v) {
  const std::size_t nh = rbm.num_hidden();
  std::vector<double> terms;
  for (std::size_t bits = 0; bits < (std::size_t{1} << nh); ++bits) terms.push_back(neg_energy(rbm, v, hidden_state(bits, nh)));
  return logsumexp(terms) - rbm_log_partition(rbm);
}

double rbm_mean_log_likelihood(const GbRbm& rbm, const DenseMatrix& data) {
  const double log_z = rbm_log_partition(rbm);
  const std::size_t nh = rbm.num_hidden();
  double total = 0.0;
  for (std::size_t r = 0; r < data.rows(); ++r) {
    std::vector<double> terms;
    for (std::size_t bits = 0; bits < (std::size_t{1} << nh); ++bits)
      terms.push_back(neg_energy(rbm, data.row(r), hidden_state(bits, nh)));
    total += logsumexp(terms) - log_z;
  }
  return total / static_cast<double>(data.rows());
}

double hidden_probability(const GbRbm& rbm, std::span<const double> v, std::size_t j) {
  // Only the j-th hidden unit differs between the two states.
  std::vector<double> h0(rbm.num_hidden(), 0.0);
  std::vector<double> h1 = h0;
  h1[j] = 1.0;
  const double gap = neg_energy(rbm, v, h1) - neg_energy(rbm, v, h0);
  return 1.0 / (1.0 + std::exp(-gap));
}

double silhouette(const DenseMatrix& points, std::span<const int> labels) {
  const std::size_t n = points.rows();
  if (labels.size() != n) throw DimensionError("silhouette: label count mismatch");
  int max_label = 0;
  for (int l : labels) max_label = std::max(max_label, l);
  const auto k = static_cast<std::size_t>(max_label) + 1;
  std::vector<std::size_t> counts(k, 0);
  for (int l : labels) ++counts[static_cast<std::size_t>(l)];
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> sum(k, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      double d2 = 0.0;
      for (std::size_t c = 0; c < points.cols(); ++c) {
        const double d = points(i, c) - points(j, c);
        d2 += d * d;
      }
      sum[static_cast<std::size_t>(labels[j])] += std::sqrt(d2);
    }
    const auto own = static_cast<std::size_t>(labels[i]);
    if (counts[own] < 2) continue;
    const double a = sum[own] / static_cast<double>(counts[own] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < k; ++c)
      if (c != own && counts[c] > 0) b = std::min(b, sum[c] / static_cast<double>(counts[c]));
    if (std::isinf(b)) continue;
    total += (b - a) / std::max(a, b);
  }
  return total / static_cast<double>(n);
}

DenseMatrix dense_normalized_adjacency(const Graph& g, bool self_loops) {
  const std::size_t n = g.num_nodes;
  DenseMatrix a(n, n);
  for (std::size_t u = 0; u < n; ++u)
    for (NodeId v : g.out_neighbors(static_cast<NodeId>(u))) {
      a(u, v) = 1.0;
      a(v, u) = 1.0;
    }
  if (self_loops)
    for (std::size_t i = 0; i < n; ++i) a(i, i) = 1.0;
  std::vector<double> deg(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) deg[i] += a(i, j);
  DenseMatrix out(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (a(i, j) != 0.0) out(i, j) = a(i, j) / std::sqrt(deg[i] * deg[j]);
  return out;
}

DenseMatrix naive_matmul(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.cols() != b.rows()) throw DimensionError("naive_matmul: inner dimension mismatch");
  DenseMatrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, j);
      c(i, j) = s;
    }
  return c;
}

std::vector<double> central_differences(std::span<double> x, const std::function<double()>& f, double eps) {
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double keep = x[i];
    x[i] = keep + eps;
    const double up = f();
    x[i] = keep - eps;
    const double down = f();
    x[i] = keep;
    out[i] = (up - down) / (2.0 * eps);
  }
  return out;
}

double relative_error(double analytic, double numeric, double floor) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
}

}  // namespace gsr::oracle
