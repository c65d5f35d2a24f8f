#include "gsr/nn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "gsr/io.hpp"
#include "gsr/kernels.hpp"
#include "gsr/metrics.hpp"
#include "gsr/rng.hpp"

namespace gsr {

std::string to_string(Arch a) {
  switch (a) {
    case Arch::mlp:
      return "mlp";
    case Arch::n2v:
      return "n2v";
    case Arch::gcn:
      return "gcn";
    case Arch::sage:
      return "sage";
  }
  return "?";
}

Arch parse_arch(const std::string& name) {
  if (name == "mlp") return Arch::mlp;
  if (name == "n2v" || name == "node2vec") return Arch::n2v;
  if (name == "gcn") return Arch::gcn;
  if (name == "sage" || name == "graphsage") return Arch::sage;
  throw ArgumentError("unknown architecture '" + name + "'");
}

bool uses_graph(Arch a) { return a == Arch::gcn || a == Arch::sage; }

BatchNormState BatchNormState::init(std::size_t features) {
  BatchNormState s;
  s.gamma.assign(features, 1.0);
  s.beta.assign(features, 0.0);
  s.running_mean.assign(features, 0.0);
  s.running_var.assign(features, 1.0);
  return s;
}

void TrainConfig::validate() const {
  if (epochs < 1) throw ArgumentError("TrainConfig: epochs must be >= 1");
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate))
    throw ArgumentError("TrainConfig: learning_rate must be finite and non-negative");
  if (!(dropout_p >= 0.0 && dropout_p < 1.0)) throw ArgumentError("TrainConfig: dropout_p must lie in [0, 1)");
  if (hidden_dim < 1) throw ArgumentError("TrainConfig: hidden_dim must be >= 1");
}

void DnnModel::validate() const {
  if (!(dropout_p >= 0.0 && dropout_p < 1.0)) throw ArgumentError("DnnModel: dropout_p must lie in [0, 1)");
  const std::array<std::size_t, 4> dims{input_dim, hidden_dim, hidden_dim, num_classes};
  for (std::size_t l = 0; l < 3; ++l) {
    const auto& p = layers[l];
    if (p.weight.rows() != dims[l] || p.weight.cols() != dims[l + 1] || p.bias.size() != dims[l + 1])
      throw DimensionError("DnnModel: layer " + std::to_string(l + 1) + " shape breaks the dimension chain");
    if (arch == Arch::sage && (p.neigh_weight.rows() != dims[l] || p.neigh_weight.cols() != dims[l + 1]))
      throw DimensionError("DnnModel: SAGE layer " + std::to_string(l + 1) + " neighbor block has wrong shape");
  }
  for (const auto& s : bn) {
    if (s.features() != hidden_dim || s.beta.size() != hidden_dim || s.running_mean.size() != hidden_dim ||
        s.running_var.size() != hidden_dim)
      throw DimensionError("DnnModel: batch-norm width != hidden_dim");
    if (!(s.epsilon > 0.0)) throw ArgumentError("DnnModel: batch-norm epsilon must be positive");
    for (double v : s.running_var)
      if (v < 0.0) throw ArgumentError("DnnModel: negative running variance");
  }
}

Propagation make_propagation(Arch arch, const Graph& g) {
  Propagation p;
  p.arch = arch;
  if (arch == Arch::gcn) {
    p.op = normalize_adjacency(g, true);
    p.op_t = p.op;
  } else if (arch == Arch::sage) {
    p.op = mean_aggregator(g);
    p.op_t = p.op.transposed();
  }
  return p;
}

DenseMatrix model_input(const DnnModel& model, const Graph& g) {
  if (model.arch == Arch::n2v) {
    if (model.embeddings.rows() != g.num_nodes)
      throw DimensionError("node2vec model holds " + std::to_string(model.embeddings.rows()) +
                           " embedding rows for a graph of " + std::to_string(g.num_nodes) + " nodes");
    return hconcat(g.features, model.embeddings);
  }
  return g.features;
}

DnnModel init_model(Arch arch, std::size_t input_dim, std::size_t hidden_dim, std::size_t num_classes,
                    double dropout_p, std::uint64_t seed) {
  DnnModel m;
  m.arch = arch;
  m.input_dim = input_dim;
  m.hidden_dim = hidden_dim;
  m.num_classes = num_classes;
  m.dropout_p = dropout_p;
  Rng rng = make_rng(seed, {0x1417});
  const std::array<std::size_t, 4> dims{input_dim, hidden_dim, hidden_dim, num_classes};
  auto he_uniform = [&rng](std::size_t fan_in, std::size_t fan_out) {
    DenseMatrix w(fan_in, fan_out);
    const double limit = std::sqrt(6.0 / static_cast<double>(std::max<std::size_t>(fan_in, 1)));
    std::uniform_real_distribution<double> u(-limit, limit);
    for (double& v : w.values()) v = u(rng);
    return w;
  };
  for (std::size_t l = 0; l < 3; ++l) {
    m.layers[l].weight = he_uniform(dims[l], dims[l + 1]);
    if (arch == Arch::sage) m.layers[l].neigh_weight = he_uniform(dims[l], dims[l + 1]);
    m.layers[l].bias.assign(dims[l + 1], 0.0);
  }
  m.bn = {BatchNormState::init(hidden_dim), BatchNormState::init(hidden_dim)};
  return m;
}

// ---- layer primitives ----

DenseMatrix dense_forward(const DenseMatrix& x, const DenseMatrix& w, std::span<const double> b) {
  if (x.cols() != w.rows())
    throw DimensionError("dense_forward: input has " + std::to_string(x.cols()) + " columns, weight has " +
                         std::to_string(w.rows()) + " rows");
  if (b.size() != w.cols()) throw DimensionError("dense_forward: bias length != weight columns");
  DenseMatrix out = kernels::matmul(x, w);
  add_row_bias(out, b);
  return out;
}

DenseMatrix gcn_forward(const DenseMatrix& h, const CsrMatrix& a_norm, const DenseMatrix& w,
                        std::span<const double> b) {
  if (a_norm.n != h.rows()) throw DimensionError("gcn_forward: propagation size != node count");
  return dense_forward(kernels::spmm(a_norm, h), w, b);
}

DenseMatrix sage_forward(const DenseMatrix& h, const CsrMatrix& mean_op, const DenseMatrix& w_self,
                         const DenseMatrix& w_neigh, std::span<const double> b) {
  if (mean_op.n != h.rows()) throw DimensionError("sage_forward: aggregator size != node count");
  if (w_self.rows() != w_neigh.rows() || w_self.cols() != w_neigh.cols())
    throw DimensionError("sage_forward: self and neighbor weights differ in shape");
  DenseMatrix out = dense_forward(h, w_self, b);
  DenseMatrix neigh = kernels::matmul(kernels::spmm(mean_op, h), w_neigh);
  for (std::size_t i = 0; i < out.size(); ++i) out.values()[i] += neigh.values()[i];
  return out;
}

DenseMatrix sage_forward(const DenseMatrix& h, const Graph& g, const DenseMatrix& w_self,
                         const DenseMatrix& w_neigh, std::span<const double> b) {
  return sage_forward(h, mean_aggregator(g), w_self, w_neigh, b);
}

DenseMatrix batchnorm_forward(const DenseMatrix& z, BatchNormState& state, Mode mode, BatchNormCache* cache) {
  const std::size_t f = state.features();
  if (z.cols() != f) throw DimensionError("batchnorm: input width != feature count");
  if (mode == Mode::infer) return batchnorm_infer(z, state);
  if (z.rows() < 2) throw BatchSizeError("batchnorm: train mode needs at least 2 rows");

  const auto n = static_cast<double>(z.rows());
  Vector mean = column_sums(z);
  for (double& m : mean) m /= n;
  Vector var(f, 0.0);
  for (std::size_t r = 0; r < z.rows(); ++r)
    for (std::size_t c = 0; c < f; ++c) {
      const double d = z(r, c) - mean[c];
      var[c] += d * d;
    }
  for (double& v : var) v /= n;

  Vector inv_std(f);
  for (std::size_t c = 0; c < f; ++c) inv_std[c] = 1.0 / std::sqrt(var[c] + state.epsilon);
  DenseMatrix xhat(z.rows(), f);
  DenseMatrix out(z.rows(), f);
  for (std::size_t r = 0; r < z.rows(); ++r)
    for (std::size_t c = 0; c < f; ++c) {
      xhat(r, c) = (z(r, c) - mean[c]) * inv_std[c];
      out(r, c) = state.gamma[c] * xhat(r, c) + state.beta[c];
    }
  for (std::size_t c = 0; c < f; ++c) {
    state.running_mean[c] = (1.0 - state.momentum) * state.running_mean[c] + state.momentum * mean[c];
    state.running_var[c] = (1.0 - state.momentum) * state.running_var[c] + state.momentum * var[c];
  }
  if (cache != nullptr) {
    cache->xhat = std::move(xhat);
    cache->inv_std = std::move(inv_std);
  }
  return out;
}

DenseMatrix batchnorm_infer(const DenseMatrix& z, const BatchNormState& state) {
  const std::size_t f = state.features();
  if (z.cols() != f) throw DimensionError("batchnorm: input width != feature count");
  DenseMatrix out(z.rows(), f);
  for (std::size_t c = 0; c < f; ++c) {
    const double scale = state.gamma[c] / std::sqrt(state.running_var[c] + state.epsilon);
    for (std::size_t r = 0; r < z.rows(); ++r)
      out(r, c) = (z(r, c) - state.running_mean[c]) * scale + state.beta[c];
  }
  return out;
}

BatchNormGrads batchnorm_backward(const DenseMatrix& dy, const BatchNormCache& cache, std::span<const double> gamma) {
  require_same_shape(dy, cache.xhat, "batchnorm_backward");
  const std::size_t f = dy.cols();
  const auto n = static_cast<double>(dy.rows());
  BatchNormGrads g{DenseMatrix(dy.rows(), f), Vector(f, 0.0), Vector(f, 0.0)};
  Vector sum_dxhat(f, 0.0);
  Vector sum_dxhat_xhat(f, 0.0);
  for (std::size_t r = 0; r < dy.rows(); ++r)
    for (std::size_t c = 0; c < f; ++c) {
      const double d = dy(r, c);
      g.dgamma[c] += d * cache.xhat(r, c);
      g.dbeta[c] += d;
      const double dxhat = d * gamma[c];
      sum_dxhat[c] += dxhat;
      sum_dxhat_xhat[c] += dxhat * cache.xhat(r, c);
    }
  for (std::size_t r = 0; r < dy.rows(); ++r)
    for (std::size_t c = 0; c < f; ++c) {
      const double dxhat = dy(r, c) * gamma[c];
      g.dz(r, c) = cache.inv_std[c] / n * (n * dxhat - sum_dxhat[c] - cache.xhat(r, c) * sum_dxhat_xhat[c]);
    }
  return g;
}

ActivationResult activation_forward(const DenseMatrix& z, double dropout_p, Mode mode, std::uint64_t seed) {
  if (!(dropout_p >= 0.0 && dropout_p < 1.0)) throw ArgumentError("dropout probability must lie in [0, 1)");
  DenseMatrix mask(z.rows(), z.cols(), 1.0);
  if (mode == Mode::train && dropout_p > 0.0) {
    Rng rng = make_rng(seed, {0xd0});
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double keep_scale = 1.0 / (1.0 - dropout_p);
    for (double& m : mask.values()) m = u(rng) < dropout_p ? 0.0 : keep_scale;
  }
  return activation_forward(z, mask);
}

ActivationResult activation_forward(const DenseMatrix& z, const DenseMatrix& mask) {
  require_same_shape(z, mask, "activation mask");
  DenseMatrix out(z.rows(), z.cols());
  for (std::size_t i = 0; i < z.size(); ++i) out.values()[i] = std::max(z.values()[i], 0.0) * mask.values()[i];
  return {std::move(out), mask};
}

DenseMatrix log_softmax(const DenseMatrix& z) {
  DenseMatrix out(z.rows(), z.cols());
  for (std::size_t r = 0; r < z.rows(); ++r) {
    auto row = z.row(r);
    const double mx = *std::max_element(row.begin(), row.end());
    double s = 0.0;
    for (double v : row) s += std::exp(v - mx);
    const double lse = mx + std::log(s);
    for (std::size_t c = 0; c < row.size(); ++c) out(r, c) = row[c] - lse;
  }
  return out;
}

NllResult log_softmax_nll(const DenseMatrix& logits, std::span<const int> labels, std::span<const NodeId> mask) {
  if (mask.empty()) throw ArgumentError("log_softmax_nll: empty mask");
  if (labels.size() != logits.rows()) throw DimensionError("log_softmax_nll: labels length != logits rows");
  NllResult res{0.0, log_softmax(logits)};
  for (auto v : mask) {
    if (v >= logits.rows()) throw DimensionError("log_softmax_nll: mask node out of range");
    const int y = labels[v];
    if (y < 0 || static_cast<std::size_t>(y) >= logits.cols()) throw ArgumentError("log_softmax_nll: label out of range");
    res.loss -= res.log_probs(v, static_cast<std::size_t>(y));
  }
  res.loss /= static_cast<double>(mask.size());
  return res;
}

DenseMatrix nll_gradient(const DenseMatrix& log_probs, std::span<const int> labels, std::span<const NodeId> mask) {
  if (mask.empty()) throw ArgumentError("nll_gradient: empty mask");
  DenseMatrix d(log_probs.rows(), log_probs.cols());
  const double scale = 1.0 / static_cast<double>(mask.size());
  for (auto v : mask) {
    for (std::size_t c = 0; c < log_probs.cols(); ++c) d(v, c) = std::exp(log_probs(v, c)) * scale;
    d(v, static_cast<std::size_t>(labels[v])) -= scale;
  }
  return d;
}

// ---- whole-network passes ----

namespace {

DenseMatrix aggregate(const Propagation& prop, const DenseMatrix& h) {
  return prop.op.n == 0 ? DenseMatrix{} : kernels::spmm(prop.op, h);
}

// NN_l applied to h; `aggregated` receives A*h for graph layers.
DenseMatrix apply_layer(const DnnModel& m, std::size_t l, const DenseMatrix& h, const Propagation& prop,
                        DenseMatrix* aggregated) {
  const auto& p = m.layers[l];
  switch (m.arch) {
    case Arch::mlp:
    case Arch::n2v:
      return dense_forward(h, p.weight, p.bias);
    case Arch::gcn: {
      if (prop.arch != Arch::gcn) throw StateError("GCN model needs a GCN propagation operator");
      DenseMatrix agg = aggregate(prop, h);
      DenseMatrix out = dense_forward(agg, p.weight, p.bias);
      if (aggregated != nullptr) *aggregated = std::move(agg);
      return out;
    }
    case Arch::sage: {
      if (prop.arch != Arch::sage) throw StateError("SAGE model needs a SAGE propagation operator");
      DenseMatrix agg = aggregate(prop, h);
      DenseMatrix out = dense_forward(h, p.weight, p.bias);
      DenseMatrix neigh = kernels::matmul(agg, p.neigh_weight);
      for (std::size_t i = 0; i < out.size(); ++i) out.values()[i] += neigh.values()[i];
      if (aggregated != nullptr) *aggregated = std::move(agg);
      return out;
    }
  }
  throw StateError("unknown architecture");
}

}  // namespace

DenseMatrix forward_train(DnnModel& model, const DenseMatrix& z0, const Propagation& prop, ForwardCache& cache,
                          std::uint64_t dropout_seed, const std::array<DenseMatrix, 2>* frozen_masks) {
  if (z0.cols() != model.input_dim) throw DimensionError("forward: input width != model input_dim");
  cache = ForwardCache{};
  DenseMatrix h = z0;
  for (std::size_t l = 0; l < 3; ++l) {
    auto& lc = cache.layers[l];
    lc.input = h;
    lc.z = apply_layer(model, l, h, prop, &lc.aggregated);
    if (l == 2) break;
    lc.pre_dropout = batchnorm_forward(lc.z, model.bn[l], Mode::train, &lc.bn);
    ActivationResult act = frozen_masks != nullptr
                               ? activation_forward(lc.pre_dropout, (*frozen_masks)[l])
                               : activation_forward(lc.pre_dropout, model.dropout_p, Mode::train,
                                                    derive_seed(dropout_seed, {l}));
    lc.mask = std::move(act.mask);
    h = std::move(act.out);
  }
  cache.logits = cache.layers[2].z;
  cache.valid = true;
  return cache.logits;
}

ModelGrads zero_grads(const DnnModel& model) {
  ModelGrads g;
  for (std::size_t l = 0; l < 3; ++l) {
    const auto& p = model.layers[l];
    g.layers[l].weight = DenseMatrix(p.weight.rows(), p.weight.cols());
    if (!p.neigh_weight.empty() || model.arch == Arch::sage)
      g.layers[l].neigh_weight = DenseMatrix(p.neigh_weight.rows(), p.neigh_weight.cols());
    g.layers[l].bias.assign(p.bias.size(), 0.0);
  }
  for (std::size_t b = 0; b < 2; ++b) {
    g.dgamma[b].assign(model.bn[b].features(), 0.0);
    g.dbeta[b].assign(model.bn[b].features(), 0.0);
  }
  return g;
}

ModelGrads backward_pass(const DnnModel& model, const Propagation& prop, const ForwardCache& cache,
                         const DenseMatrix& d_logits) {
  if (!cache.valid) throw StateError("backward_pass: no train-mode forward intermediates");
  require_same_shape(d_logits, cache.logits, "backward_pass: loss gradient");
  ModelGrads g = zero_grads(model);
  DenseMatrix dz = d_logits;
  for (std::size_t step = 0; step < 3; ++step) {
    const std::size_t l = 2 - step;
    const auto& lc = cache.layers[l];
    const auto& p = model.layers[l];
    auto& gl = g.layers[l];
    const DenseMatrix& lin_in = model.arch == Arch::gcn ? lc.aggregated : lc.input;
    gl.weight = kernels::matmul_tn(lin_in, dz);
    gl.bias = column_sums(dz);
    if (model.arch == Arch::sage) gl.neigh_weight = kernels::matmul_tn(lc.aggregated, dz);
    if (l == 0) break;

    // Gradient with respect to this layer's input h_{l}.
    DenseMatrix dh;
    switch (model.arch) {
      case Arch::mlp:
      case Arch::n2v:
        dh = kernels::matmul_nt(dz, p.weight);
        break;
      case Arch::gcn:
        dh = kernels::spmm(prop.op_t, kernels::matmul_nt(dz, p.weight));
        break;
      case Arch::sage: {
        dh = kernels::matmul_nt(dz, p.weight);
        DenseMatrix dn = kernels::spmm(prop.op_t, kernels::matmul_nt(dz, p.neigh_weight));
        for (std::size_t i = 0; i < dh.size(); ++i) dh.values()[i] += dn.values()[i];
        break;
      }
    }

    // Back through dropout, ReLU and batch norm of block l-1.
    const auto& prev = cache.layers[l - 1];
    DenseMatrix dy(dh.rows(), dh.cols());
    for (std::size_t i = 0; i < dh.size(); ++i)
      dy.values()[i] = prev.pre_dropout.values()[i] > 0.0 ? dh.values()[i] * prev.mask.values()[i] : 0.0;
    BatchNormGrads bg = batchnorm_backward(dy, prev.bn, model.bn[l - 1].gamma);
    g.dgamma[l - 1] = std::move(bg.dgamma);
    g.dbeta[l - 1] = std::move(bg.dbeta);
    dz = std::move(bg.dz);
  }
  return g;
}

std::vector<ParamView> parameter_views(DnnModel& model, const ModelGrads& grads) {
  std::vector<ParamView> v;
  for (std::size_t l = 0; l < 3; ++l) {
    const std::string tag = "layer" + std::to_string(l + 1);
    auto& p = model.layers[l];
    const auto& g = grads.layers[l];
    v.push_back({tag + ".weight", p.weight.values(), g.weight.values()});
    if (model.arch == Arch::sage) v.push_back({tag + ".neigh_weight", p.neigh_weight.values(), g.neigh_weight.values()});
    v.push_back({tag + ".bias", p.bias, g.bias});
  }
  for (std::size_t b = 0; b < 2; ++b) {
    const std::string tag = "bn" + std::to_string(b + 1);
    v.push_back({tag + ".gamma", model.bn[b].gamma, grads.dgamma[b]});
    v.push_back({tag + ".beta", model.bn[b].beta, grads.dbeta[b]});
  }
  return v;
}

const DenseMatrix& Taps::at(int tap) const {
  switch (tap) {
    case 0:
      return z0;
    case 1:
      return z1;
    case 2:
      return z2;
    case 3:
      return z3;
  }
  throw ArgumentError("tap index " + std::to_string(tap) + " outside {0,1,2,3}");
}

DenseMatrix& Taps::at(int tap) { return const_cast<DenseMatrix&>(std::as_const(*this).at(tap)); }

Taps forward_from_tap(const DnnModel& model, int tap, DenseMatrix z_tap, const Propagation& prop, Taps prefix) {
  if (tap < 0 || tap > 3) throw ArgumentError("tap index " + std::to_string(tap) + " outside {0,1,2,3}");
  const std::array<std::size_t, 4> widths{model.input_dim, model.hidden_dim, model.hidden_dim, model.num_classes};
  if (z_tap.cols() != widths[static_cast<std::size_t>(tap)])
    throw DimensionError("representation at tap " + std::to_string(tap) + " has width " +
                         std::to_string(z_tap.cols()) + ", expected " +
                         std::to_string(widths[static_cast<std::size_t>(tap)]));
  Taps t = std::move(prefix);
  t.at(tap) = std::move(z_tap);
  for (int l = tap; l < 3; ++l) {
    DenseMatrix h;
    if (l == 0) {
      h = t.z0;
    } else {
      // BN (running stats) -> ReLU; dropout is off at inference.
      h = batchnorm_infer(t.at(l), model.bn[static_cast<std::size_t>(l - 1)]);
      for (double& v : h.values()) v = std::max(v, 0.0);
    }
    t.at(l + 1) = apply_layer(model, static_cast<std::size_t>(l), h, prop, nullptr);
  }
  return t;
}

Taps forward_infer(const DnnModel& model, const DenseMatrix& z0, const Propagation& prop) {
  return forward_from_tap(model, 0, z0, prop);
}

DnnModel train_dnn(const Graph& g, Arch arch, const TrainConfig& cfg, const DenseMatrix* n2v_embeddings,
                   TrainHistory* history) {
  cfg.validate();
  if (g.split.train.empty()) throw ArgumentError("train_dnn: empty train split");
  if (arch == Arch::n2v) {
    if (n2v_embeddings == nullptr) throw ArgumentError("train_dnn: node2vec architecture needs embeddings");
    if (n2v_embeddings->rows() != g.num_nodes) throw DimensionError("train_dnn: embedding rows != node count");
  }

  DnnModel model;
  {
    const std::size_t in_dim = g.features.cols() + (arch == Arch::n2v ? n2v_embeddings->cols() : 0);
    model = init_model(arch, in_dim, cfg.hidden_dim, static_cast<std::size_t>(g.num_classes), cfg.dropout_p, cfg.seed);
  }
  model.config = cfg;
  if (arch == Arch::n2v) model.embeddings = *n2v_embeddings;

  const DenseMatrix full_input = model_input(model, g);
  const Propagation prop = make_propagation(arch, g);

  // Feature-only models train on the train rows alone; graph models run the
  // whole graph and take the loss over the train mask.
  DenseMatrix train_input;
  std::vector<int> train_labels;
  std::vector<NodeId> train_mask;
  if (uses_graph(arch)) {
    train_input = full_input;
    train_labels = g.labels;
    train_mask = g.split.train;
  } else {
    std::vector<std::size_t> rows(g.split.train.begin(), g.split.train.end());
    train_input = full_input.select_rows(rows);
    for (auto v : g.split.train) train_labels.push_back(g.labels[v]);
    train_mask.resize(rows.size());
    std::iota(train_mask.begin(), train_mask.end(), NodeId{0});
  }
  const Propagation no_prop{arch, {}, {}};
  const Propagation& train_prop = uses_graph(arch) ? prop : no_prop;

  Adam adam(AdamConfig{cfg.learning_rate, 0.9, 0.999, 1e-8});
  DnnModel best = model;
  double best_val = -1.0;
  ForwardCache cache;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const DenseMatrix logits =
        forward_train(model, train_input, train_prop, cache, derive_seed(cfg.seed, {0xe90c, epoch}));
    const NllResult nll = log_softmax_nll(logits, train_labels, train_mask);
    const ModelGrads grads = backward_pass(model, train_prop, cache, nll_gradient(nll.log_probs, train_labels, train_mask));
    auto views = parameter_views(model, grads);
    if (cfg.optimizer == OptimizerKind::adam)
      adam.step(views);
    else
      sgd_step(views, cfg.learning_rate);

    double val_acc = 0.0;
    if (!g.split.val.empty()) {
      const Taps taps = forward_infer(model, full_input, prop);
      val_acc = accuracy(argmax_rows(taps.z3), g.labels, g.split.val);
    }
    if (history != nullptr) {
      history->train_loss.push_back(nll.loss);
      history->val_accuracy.push_back(val_acc);
    }
    if (g.split.val.empty() || val_acc > best_val) {
      best_val = val_acc;
      best = model;
      if (history != nullptr) history->best_epoch = epoch;
    }
  }
  return best;
}

// ---- checkpoint ----

namespace {
constexpr std::uint32_t kModelVersion = 1;

void put_bn(io::BinaryWriter& w, const BatchNormState& s) {
  w.put_array<double>(s.gamma);
  w.put_array<double>(s.beta);
  w.put_array<double>(s.running_mean);
  w.put_array<double>(s.running_var);
  w.put<double>(s.momentum);
  w.put<double>(s.epsilon);
}

BatchNormState get_bn(io::BinaryReader& r) {
  BatchNormState s;
  s.gamma = r.get_array<double>("bn.gamma");
  s.beta = r.get_array<double>("bn.beta");
  s.running_mean = r.get_array<double>("bn.running_mean");
  s.running_var = r.get_array<double>("bn.running_var");
  s.momentum = r.get<double>("bn.momentum");
  s.epsilon = r.get<double>("bn.epsilon");
  return s;
}
}  // namespace

std::vector<std::uint8_t> encode_model(const DnnModel& m) {
  io::BinaryWriter w;
  w.put_magic("GSRM");
  w.put<std::uint32_t>(kModelVersion);
  w.put<std::uint8_t>(static_cast<std::uint8_t>(m.arch));
  w.put<std::uint64_t>(m.input_dim);
  w.put<std::uint64_t>(m.hidden_dim);
  w.put<std::uint64_t>(m.num_classes);
  w.put<double>(m.dropout_p);
  for (const auto& p : m.layers) {
    w.put_matrix(p.weight);
    w.put_matrix(p.neigh_weight);
    w.put_array<double>(p.bias);
  }
  for (const auto& s : m.bn) put_bn(w, s);
  w.put_matrix(m.embeddings);
  w.put<std::uint64_t>(m.config.epochs);
  w.put<double>(m.config.learning_rate);
  w.put<double>(m.config.dropout_p);
  w.put<std::uint64_t>(m.config.hidden_dim);
  w.put<std::uint64_t>(m.config.seed);
  w.put<std::uint8_t>(static_cast<std::uint8_t>(m.config.optimizer));
  return w.bytes();
}

DnnModel decode_model(std::vector<std::uint8_t> bytes, const std::string& source) {
  io::BinaryReader r(std::move(bytes), source);
  r.expect_magic("GSRM");
  const auto version = r.get<std::uint32_t>("version");
  if (version != kModelVersion) r.fail("version", "unsupported version " + std::to_string(version));
  DnnModel m;
  const auto arch = r.get<std::uint8_t>("arch");
  if (arch > static_cast<std::uint8_t>(Arch::sage)) r.fail("arch", "unknown architecture tag");
  m.arch = static_cast<Arch>(arch);
  m.input_dim = r.get<std::uint64_t>("input_dim");
  m.hidden_dim = r.get<std::uint64_t>("hidden_dim");
  m.num_classes = r.get<std::uint64_t>("num_classes");
  m.dropout_p = r.get<double>("dropout_p");
  for (auto& p : m.layers) {
    p.weight = r.get_matrix("layer.weight");
    p.neigh_weight = r.get_matrix("layer.neigh_weight");
    p.bias = r.get_array<double>("layer.bias");
  }
  for (auto& s : m.bn) s = get_bn(r);
  m.embeddings = r.get_matrix("embeddings");
  m.config.epochs = r.get<std::uint64_t>("config.epochs");
  m.config.learning_rate = r.get<double>("config.learning_rate");
  m.config.dropout_p = r.get<double>("config.dropout_p");
  m.config.hidden_dim = r.get<std::uint64_t>("config.hidden_dim");
  m.config.seed = r.get<std::uint64_t>("config.seed");
  const auto opt = r.get<std::uint8_t>("config.optimizer");
  if (opt > 1) r.fail("config.optimizer", "unknown optimizer tag");
  m.config.optimizer = static_cast<OptimizerKind>(opt);
  if (!r.at_end()) r.fail("trailer", "unexpected trailing bytes");
  m.validate();
  return m;
}

void save_model(const DnnModel& model, const std::filesystem::path& path) {
  io::write_file_atomic(path, encode_model(model));
}

DnnModel load_model(const std::filesystem::path& path) { return decode_model(io::read_file(path), path.string()); }

}  // namespace gsr
