#include "acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <tuple>

#include "gsr/distortion.hpp"
#include "gsr/evaluation.hpp"
#include "gsr/metrics.hpp"
#include "gsr/nn.hpp"
#include "gsr/node2vec.hpp"
#include "gsr/pipeline.hpp"
#include "gsr/rbm.hpp"
#include "gsr/rng.hpp"
#include "gsr/tsne.hpp"
#include "oracles.hpp"

namespace gsr::verify {

namespace {

struct Outcome {
  Status status = Status::fail;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), f, args...);
  return buf;
}

DenseMatrix random_matrix(std::size_t r, std::size_t c, Rng& rng, double scale = 1.0) {
  std::normal_distribution<double> nd(0.0, scale);
  DenseMatrix m(r, c);
  for (double& v : m.values()) v = nd(rng);
  return m;
}

double max_rel_error(std::span<const double> analytic, std::span<const double> numeric) {
  double worst = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i)
    worst = std::max(worst, oracle::relative_error(analytic[i], numeric[i]));
  return worst;
}

// ---- 1: gradients ----

double model_gradient_error(Arch arch, std::uint64_t seed) {
  SbmParams sp;
  sp.num_nodes = 12;
  sp.num_classes = 3;
  sp.p_in = 0.5;
  sp.p_out = 0.1;
  sp.feature_dim = 5;
  sp.seed = seed;
  const Graph g = generate_sbm_graph(sp);
  Rng rng = make_rng(seed, {0x9ad});
  std::size_t in_dim = g.features.cols();
  DenseMatrix emb;
  if (arch == Arch::n2v) {
    emb = random_matrix(g.num_nodes, 3, rng);
    in_dim += emb.cols();
  }
  DnnModel m = init_model(arch, in_dim, 6, 3, 0.3, seed);
  if (arch == Arch::n2v) m.embeddings = emb;
  std::uniform_real_distribution<double> u(0.5, 1.5);
  for (auto& bn : m.bn) {
    for (double& v : bn.gamma) v = u(rng);
    for (double& v : bn.beta) v = u(rng) - 1.0;
  }
  for (auto& layer : m.layers)
    for (double& v : layer.bias) v = u(rng) - 1.0;
  const Propagation prop = make_propagation(arch, g);
  const DenseMatrix z0 = model_input(m, g);

  ForwardCache cache;
  forward_train(m, z0, prop, cache, derive_seed(seed, {1}));
  const std::array<DenseMatrix, 2> masks{cache.layers[0].mask, cache.layers[1].mask};
  auto loss = [&] {
    ForwardCache c;
    return log_softmax_nll(forward_train(m, z0, prop, c, 0, &masks), g.labels, g.split.train).loss;
  };
  const NllResult nll = log_softmax_nll(forward_train(m, z0, prop, cache, 0, &masks), g.labels, g.split.train);
  const ModelGrads grads = backward_pass(m, prop, cache, nll_gradient(nll.log_probs, g.labels, g.split.train));
  double worst = 0.0;
  for (const ParamView& view : parameter_views(m, grads)) {
    const auto numeric = oracle::central_differences(view.value, loss);
    worst = std::max(worst, max_rel_error(view.grad, numeric));
  }
  return worst;
}

double batchnorm_gradient_error(std::uint64_t seed) {
  Rng rng = make_rng(seed, {0xb4});
  DenseMatrix z = random_matrix(8, 4, rng, 2.0);
  const DenseMatrix weight = random_matrix(8, 4, rng);
  BatchNormState st = BatchNormState::init(4);
  std::uniform_real_distribution<double> u(0.5, 1.5);
  for (double& v : st.gamma) v = u(rng);
  for (double& v : st.beta) v = u(rng);
  auto loss = [&] {
    BatchNormState s = st;
    const DenseMatrix y = batchnorm_forward(z, s, Mode::train);
    double l = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) l += weight.values()[i] * y.values()[i];
    return l;
  };
  BatchNormState s = st;
  BatchNormCache cache;
  batchnorm_forward(z, s, Mode::train, &cache);
  const BatchNormGrads g = batchnorm_backward(weight, cache, st.gamma);
  double worst = max_rel_error(g.dz.values(), oracle::central_differences(z.values(), loss));
  worst = std::max(worst, max_rel_error(g.dgamma, oracle::central_differences(st.gamma, loss)));
  worst = std::max(worst, max_rel_error(g.dbeta, oracle::central_differences(st.beta, loss)));
  return worst;
}

double nll_gradient_error(std::uint64_t seed) {
  Rng rng = make_rng(seed, {0x11});
  DenseMatrix logits = random_matrix(10, 4, rng, 2.0);
  std::vector<int> labels(10);
  for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = static_cast<int>(i % 4);
  const std::vector<NodeId> mask{0, 2, 3, 5, 7, 8};
  auto loss = [&] { return log_softmax_nll(logits, labels, mask).loss; };
  const DenseMatrix g = nll_gradient(log_softmax_nll(logits, labels, mask).log_probs, labels, mask);
  return max_rel_error(g.values(), oracle::central_differences(logits.values(), loss));
}

double tsne_gradient_error(std::uint64_t seed) {
  Rng rng = make_rng(seed, {0x75});
  const DenseMatrix x = random_matrix(10, 3, rng);
  const DenseMatrix p = joint_affinities(x, 3.0);
  DenseMatrix y = random_matrix(10, 2, rng);
  const DenseMatrix g = tsne_gradient(p, y);
  return max_rel_error(g.values(), oracle::central_differences(y.values(), [&] { return tsne_kl(p, y); }));
}

Outcome gradients() {
  constexpr double kTol = 1e-3;
  std::vector<std::pair<std::string, double>> errs;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    errs.emplace_back("dense(mlp)", model_gradient_error(Arch::mlp, seed));
    errs.emplace_back("dense(n2v)", model_gradient_error(Arch::n2v, seed));
    errs.emplace_back("gcn", model_gradient_error(Arch::gcn, seed));
    errs.emplace_back("sage", model_gradient_error(Arch::sage, seed));
    errs.emplace_back("batchnorm", batchnorm_gradient_error(seed));
    errs.emplace_back("log-softmax-nll", nll_gradient_error(seed));
    errs.emplace_back("tsne", tsne_gradient_error(seed));
  }
  std::map<std::string, double> worst;
  for (const auto& [k, v] : errs) worst[k] = std::max(worst[k], v);
  bool ok = true;
  std::string detail = "max rel err:";
  for (const auto& [k, v] : worst) {
    ok = ok && v <= kTol;
    detail += fmt(" %s=%.2e", k.c_str(), v);
  }
  return {ok ? Status::pass : Status::fail, detail + " (relu masks and dropout included in network checks)"};
}

// ---- 2: RBM conditionals ----

GbRbm small_rbm(std::uint64_t seed) {
  Rng rng = make_rng(seed, {0x2b});
  GbRbm rbm;
  rbm.weight = random_matrix(3, 4, rng, 0.5);
  rbm.visible_bias = {0.5, -1.0, 2.0};
  rbm.hidden_bias = {0.1, -0.3, 0.2, 0.0};
  rbm.sigma = {0.5, 1.0, 2.0};
  return rbm;
}

Outcome rbm_conditionals() {
  const GbRbm rbm = small_rbm(3);
  constexpr std::size_t kDraws = 100000;
  const std::vector<double> h{1, 0, 1, 1};
  DenseMatrix hm(kDraws, 4);
  for (std::size_t r = 0; r < kDraws; ++r) std::copy(h.begin(), h.end(), hm.row(r).begin());
  Rng rng = make_rng(11);
  const DenseMatrix v = visible_conditional(rbm, hm, true, rng);
  bool ok = true;
  double worst_z = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    double mu = rbm.visible_bias[i];
    for (std::size_t j = 0; j < 4; ++j) mu += rbm.sigma[i] * rbm.weight(i, j) * h[j];
    const double var = rbm.sigma[i] * rbm.sigma[i];
    double mean_hat = 0.0;
    for (std::size_t r = 0; r < kDraws; ++r) mean_hat += v(r, i);
    mean_hat /= kDraws;
    double var_hat = 0.0;
    for (std::size_t r = 0; r < kDraws; ++r) var_hat += (v(r, i) - mean_hat) * (v(r, i) - mean_hat);
    var_hat /= kDraws - 1;
    const double z_mean = std::abs(mean_hat - mu) / std::sqrt(var / kDraws);
    const double z_var = std::abs(var_hat - var) / (var * std::sqrt(2.0 / (kDraws - 1)));
    worst_z = std::max({worst_z, z_mean, z_var});
    ok = ok && z_mean < 3.0 && z_var < 3.0;
  }
  Rng vr = make_rng(12);
  const DenseMatrix vis = random_matrix(6, 3, vr, 2.0);
  const DenseMatrix ph = hidden_conditional(rbm, vis);
  double worst_h = 0.0;
  for (std::size_t r = 0; r < vis.rows(); ++r)
    for (std::size_t j = 0; j < 4; ++j)
      worst_h = std::max(worst_h, std::abs(ph(r, j) - oracle::hidden_probability(rbm, vis.row(r), j)));
  ok = ok && worst_h <= 1e-9;
  return {ok ? Status::pass : Status::fail,
          fmt("visible moments worst |z|=%.2f at 1e5 draws (< 3), hidden max abs diff %.1e (<= 1e-9)", worst_z, worst_h)};
}

// ---- 3: exact likelihood ----

DenseMatrix two_mixture(std::size_t n, std::uint64_t seed) {
  Rng rng = make_rng(seed, {0x3a});
  std::normal_distribution<double> nd(0.0, 0.5);
  DenseMatrix d(n, 2);
  for (std::size_t r = 0; r < n; ++r) {
    const double c = r % 2 == 0 ? 1.5 : -1.5;
    d(r, 0) = c + nd(rng);
    d(r, 1) = c + nd(rng);
  }
  return d;
}

Outcome exact_likelihood() {
  bool ok = true;
  std::string detail = "mean log-lik before->after 200 CD-1 updates:";
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const DenseMatrix data = two_mixture(200, seed);
    GbRbm rbm = GbRbm::init(2, 6, seed, 0.1);
    const double before = oracle::rbm_mean_log_likelihood(rbm, data);
    Rng rng = make_rng(seed, {0xcd1});
    for (int step = 0; step < 200; ++step) cd_update(rbm, data, 1, 0.05, rng);
    const double after = oracle::rbm_mean_log_likelihood(rbm, data);
    ok = ok && after > before;
    detail += fmt(" %.3f->%.3f", before, after);
  }
  return {ok ? Status::pass : Status::fail, detail + " (|V|=2, |H|=6, 5 seeds)"};
}

// ---- 4: content-addressable memory ----

Outcome associative_recall() {
  constexpr std::size_t kDim = 16;
  std::array<std::vector<double>, 2> pat;
  for (std::size_t i = 0; i < kDim; ++i) {
    pat[0].push_back(i < kDim / 2 ? 1.0 : -1.0);
    pat[1].push_back(i % 2 == 0 ? 1.0 : -1.0);
  }
  Rng rng = make_rng(4);
  std::normal_distribution<double> jitter(0.0, 0.1);
  DenseMatrix train(200, kDim);
  for (std::size_t r = 0; r < train.rows(); ++r)
    for (std::size_t i = 0; i < kDim; ++i) train(r, i) = pat[r % 2][i] + jitter(rng);
  RbmTrainConfig cfg;
  cfg.hidden_units = 16;
  cfg.epochs = 100;
  cfg.batch_size = 20;
  cfg.lr = 0.01;
  cfg.seed = 4;
  const RbmTrainResult res = train_rbm(train, cfg);
  const Scaler& sc = res.scaler;

  DenseMatrix stored(2, kDim);
  for (std::size_t k = 0; k < 2; ++k) std::copy(pat[k].begin(), pat[k].end(), stored.row(k).begin());
  const DenseMatrix stored_s = sc.transform(stored);

  constexpr int kTrials = 1000;
  std::normal_distribution<double> noise(0.0, 0.5);
  std::bernoulli_distribution coin(0.5);
  DenseMatrix cues(kTrials, kDim);
  std::vector<std::size_t> truth(kTrials);
  for (int t = 0; t < kTrials; ++t) {
    truth[t] = coin(rng) ? 1 : 0;
    for (std::size_t i = 0; i < kDim; ++i) cues(t, i) = stored_s(truth[t], i) + noise(rng);
  }
  const DenseMatrix recon = sc.transform(reconstruct(res.rbm, sc, sc.inverse(cues), {}));
  int hits = 0;
  for (int t = 0; t < kTrials; ++t) {
    std::array<double, 2> d{};
    for (std::size_t k = 0; k < 2; ++k)
      for (std::size_t i = 0; i < kDim; ++i) d[k] += (recon(t, i) - stored_s(k, i)) * (recon(t, i) - stored_s(k, i));
    const std::size_t pick = d[0] <= d[1] ? 0 : 1;
    hits += pick == truth[t] ? 1 : 0;
  }
  const bool ok = hits >= 900;
  return {ok ? Status::pass : Status::fail,
          fmt("%d/%d noisy cues (std 0.5, standardized) recalled to the correct pattern (>= 900)", hits, kTrials)};
}

// ---- 5: noise operators ----

std::size_t floor_count(std::size_t total, int n) { return static_cast<std::size_t>(std::floor(n * static_cast<double>(total) / 100.0 + 1e-9)); }

std::vector<Edge> sorted_edges_outside(const Graph& g, const std::vector<std::uint8_t>& in_target) {
  std::vector<Edge> out;
  for (const Edge& e : g.edge_list())
    if (!in_target[e.src] && !in_target[e.dst]) out.push_back(e);
  std::sort(out.begin(), out.end(), [](const Edge& a, const Edge& b) { return std::tie(a.src, a.dst) < std::tie(b.src, b.dst); });
  return out;
}

std::uint64_t train_rows_hash(const Graph& g) {
  std::uint64_t h = 1469598103934665603ULL;
  for (NodeId v : g.split.train)
    for (double x : g.features.row(v)) {
      std::uint64_t bits = 0;
      std::memcpy(&bits, &x, sizeof(bits));
      h = mix64(h ^ bits);
    }
  return h;
}

Outcome noise_operators() {
  const Graph g = generate_sbm_graph(SbmParams{});
  const auto& targets = g.split.test;
  std::vector<std::uint8_t> in_target(g.num_nodes, 0);
  for (NodeId v : targets) in_target[v] = 1;
  const auto train_hash = train_rows_hash(g);
  const auto outside = sorted_edges_outside(g, in_target);
  const auto incident = incident_edges(g, targets);
  const std::size_t entries = targets.size() * g.features.cols();

  // Rewiring count oracle: targets only touch train nodes and the pool is a
  // single fresh node, so every selected target ends up pointing at it.
  Graph star;
  star.num_nodes = 31;
  star.directed = true;
  star.features = DenseMatrix(31, 1, 1.0);
  star.labels.assign(31, 0);
  star.num_classes = 1;
  for (NodeId v = 0; v < 20; ++v) star.split.train.push_back(v);
  star.split.train.push_back(30);
  std::vector<NodeId> star_targets;
  for (NodeId v = 20; v < 30; ++v) star_targets.push_back(v);
  star.split.test = star_targets;
  std::vector<Edge> star_edges;
  for (NodeId t = 20; t < 30; ++t) {
    star_edges.push_back({t, static_cast<NodeId>(t - 20)});
    star_edges.push_back({static_cast<NodeId>((t - 20 + 7) % 20), t});
  }
  star.set_edges(star_edges);
  const std::vector<NodeId> sink{30};
  const std::vector<NodeId> any_pool = rewire_pool(g, PoolPolicy::any);

  std::vector<std::string> bad;
  for (int n = 0; n <= 100; ++n) {
    const auto seed = static_cast<std::uint64_t>(1000 + n);
    // X_c
    const DenseMatrix xc = corrupt_features(g.features, targets, n, seed);
    std::size_t changed = 0;
    for (std::size_t i = 0; i < xc.size(); ++i) changed += xc.values()[i] != g.features.values()[i] ? 1 : 0;
    if (changed != floor_count(entries, n)) bad.push_back(fmt("Xc n=%d changed %zu", n, changed));
    // X_z
    const DenseMatrix xz = blank_features(g.features, targets, n, seed);
    std::size_t zeroed = 0;
    for (std::size_t i = 0; i < xz.size(); ++i)
      zeroed += xz.values()[i] == 0.0 && g.features.values()[i] != 0.0 ? 1 : 0;
    if (zeroed != floor_count(entries, n)) bad.push_back(fmt("Xz n=%d zeroed %zu", n, zeroed));
    for (const DenseMatrix* x : {&xc, &xz}) {
      Graph probe = g;
      probe.features = *x;
      if (train_rows_hash(probe) != train_hash) bad.push_back(fmt("X n=%d touched train rows", n));
    }
    // A_z
    const Graph az = blank_adjacency(g, incident, n, seed);
    if (g.num_edges() - az.num_edges() != floor_count(incident.size(), n))
      bad.push_back(fmt("Az n=%d removed %zu", n, g.num_edges() - az.num_edges()));
    if (sorted_edges_outside(az, in_target) != outside) bad.push_back(fmt("Az n=%d touched non-target edges", n));
    // A_c
    const Graph ac = corrupt_adjacency(g, targets, n, any_pool, seed);
    if (ac.num_edges() != g.num_edges()) bad.push_back(fmt("Ac n=%d changed |E|", n));
    if (sorted_edges_outside(ac, in_target) != outside) bad.push_back(fmt("Ac n=%d touched non-target edges", n));
    const Graph sc = corrupt_adjacency(star, star_targets, n, sink, seed);
    std::size_t rewired = 0;
    for (NodeId t : star_targets) {
      bool hit = false;
      for (const Edge& e : sc.edge_list()) hit = hit || ((e.src == t && e.dst == 30) || (e.dst == t && e.src == 30));
      rewired += hit ? 1 : 0;
    }
    if (rewired != floor_count(star_targets.size(), n) || sc.num_edges() != star.num_edges())
      bad.push_back(fmt("Ac n=%d rewired %zu nodes", n, rewired));
    if (n == 0 && !(xc == g.features && xz == g.features && az == g && ac == g && sc == star))
      bad.push_back("n=0 is not bit-identity");
  }
  for (NoiseKind k : {NoiseKind::Xc, NoiseKind::Xz, NoiseKind::Ac, NoiseKind::Az})
    if (!(apply_noise(g, NoiseSpec{k, 0, PoolPolicy::any, Split::val, 9}) == g)) bad.push_back("apply_noise n=0 not identity");
  if (!bad.empty()) return {Status::fail, bad.front() + fmt(" (+%zu more)", bad.size() - 1)};
  return {Status::pass, "4 operators x n=0..100: exact floor counts, n=0 identity, Ac conserves |E|, train rows and non-target edges unchanged"};
}

// ---- 6: pipeline identity ----

Outcome pipeline_identity() {
  SbmParams sp;
  sp.num_nodes = 200;
  const Graph g = generate_sbm_graph(sp);
  WalkConfig wc;
  wc.walks_per_node = 4;
  wc.walk_length = 10;
  wc.embedding_dim = 8;
  wc.seed = 3;
  const DenseMatrix emb = train_skipgram(generate_walks(g, wc), wc);
  TrainConfig tc;
  tc.epochs = 20;
  tc.seed = 5;
  const auto rows = non_train_nodes(g);
  std::string detail;
  bool ok = true;
  for (Arch arch : {Arch::mlp, Arch::n2v, Arch::gcn, Arch::sage}) {
    const DnnModel m = train_dnn(g, arch, tc, arch == Arch::n2v ? &emb : nullptr);
    const PipelineOutput phi = forward_phi(m, g);
    for (int tap = 0; tap < kNumTaps; ++tap) {
      const PipelineOutput psi =
          run_psi_with(m, g, tap, rows, [](int, const DenseMatrix& z) { return z; });
      const bool same = psi.predictions == phi.predictions && psi.taps.z3 == phi.taps.z3;
      ok = ok && same;
      if (!same) detail += fmt(" %s/tap%d differs;", to_string(arch).c_str(), tap);
    }
  }
  return {ok ? Status::pass : Status::fail,
          ok ? "identity reconstruction reproduces phi bit-for-bit for mlp, n2v, gcn, sage x taps 0-3" : detail};
}

// ---- 7: psi0 under blanking ----

Outcome blanking_claim() {
  constexpr int kSeeds = 5;
  double clean_sum = 0.0, clean_min = 1.0, phi_sum = 0.0, psi_sum = 0.0;
  for (int s = 0; s < kSeeds; ++s) {
    const Graph g = generate_sbm_graph(blanking_sbm(static_cast<std::uint64_t>(s)));
    TrainConfig tc;
    tc.seed = static_cast<std::uint64_t>(s);
    DnnModel m = train_dnn(g, Arch::gcn, tc);
    const double clean = accuracy(forward_phi(m, g).predictions, g.labels, g.split.test);
    ReconstructOptions ro;
    ro.gibbs_rounds = kBlankingGibbsRounds;
    const std::vector<int> taps{0};
    const PsiBundle bundle = train_psi_bundle(std::move(m), g, taps, blanking_rbm(static_cast<std::uint64_t>(s)), ro);
    GridRequest req;
    req.x_kind = NoiseKind::Xz;
    req.a_kind = NoiseKind::Az;
    req.seed = static_cast<std::uint64_t>(s);
    const Graph noisy = noisy_instance(g, req, 60, 0);
    phi_sum += accuracy(forward_phi(bundle.model(), noisy).predictions, g.labels, g.split.test);
    psi_sum += accuracy(run_psi(bundle, noisy, 0).predictions, g.labels, g.split.test);
    clean_sum += clean;
    clean_min = std::min(clean_min, clean);
  }
  const double clean = clean_sum / kSeeds, phi = phi_sum / kSeeds, psi = psi_sum / kSeeds;
  const bool ok = clean >= 0.90 && psi >= phi + 0.05;
  return {ok ? Status::pass : Status::fail,
          fmt("GCN clean test acc mean %.3f (min %.3f); X_z 60%%: P(phi)=%.3f P(psi0)=%.3f gap %+.3f (need >= +0.05)", clean,
              clean_min, phi, psi, psi - phi)};
}

// ---- 8: grid contracts ----

bool same_bits(const AccuracyGrid& a, const AccuracyGrid& b) {
  return std::memcmp(a.values.data(), b.values.data(), sizeof(double) * a.values.size()) == 0;
}

Outcome grid_contracts() {
  const Graph g = generate_sbm_graph(SbmParams{});
  TrainConfig tc;
  tc.epochs = 60;
  tc.seed = 2;
  RbmTrainConfig rc;
  rc.hidden_units = 16;
  rc.epochs = 10;
  rc.batch_size = 32;
  rc.seed = 2;
  const std::vector<int> taps{0, 1, 2, 3};
  std::vector<std::string> bad;
  std::size_t grids_checked = 0;
  for (Arch arch : {Arch::gcn, Arch::mlp}) {
    const PsiBundle bundle = train_psi_bundle(train_dnn(g, arch, tc), g, taps, rc);
    GridRequest req;
    req.taps = taps;
    req.seed = 21;
    req.x_kind = arch == Arch::gcn ? NoiseKind::Xc : NoiseKind::Xz;
    req.a_kind = arch == Arch::gcn ? NoiseKind::Ac : NoiseKind::Az;
    const GridResult first = run_grid(bundle, g, req);
    const GridResult second = run_grid(bundle, g, req);
    if (!first.failures.empty()) bad.push_back(first.failures.front());
    for (std::size_t k = 0; k < first.grids.size(); ++k) {
      ++grids_checked;
      const AccuracyGrid& grid = first.grids[k];
      const std::string name = to_string(arch) + "/" + grid.meta.pipeline;
      const PipelineOutput clean = k == 0 ? forward_phi(bundle.model(), g) : run_psi(bundle, g, taps[k - 1]);
      if (grid.at(0, 0) != accuracy(clean.predictions, g.labels, g.split.test)) bad.push_back(name + " cell (0,0) != clean");
      if (!same_bits(grid, second.grids[k])) bad.push_back(name + " rerun not bit-identical");
      if (arch == Arch::mlp)
        for (int ix = 0; ix < kGridSteps; ++ix) {
          double lo = grid.at(ix, 0), hi = lo;
          for (int ia = 0; ia < kGridSteps; ++ia) {
            lo = std::min(lo, grid.at(ix, ia));
            hi = std::max(hi, grid.at(ix, ia));
          }
          if (hi - lo != 0.0) bad.push_back(name + fmt(" varies along n_A at n_X=%d", ix * 10));
        }
    }
  }
  if (!bad.empty()) return {Status::fail, bad.front() + fmt(" (+%zu more)", bad.size() - 1)};
  return {Status::pass, fmt("%zu grids (gcn Xc/Ac, mlp Xz/Az, phi + psi0-3): (0,0) = clean accuracy, mlp constant along n_A, "
                            "same-seed reruns bit-identical",
                            grids_checked)};
}

// ---- 9: t-SNE ----

Outcome tsne_checks() {
  constexpr std::size_t kPer = 50;
  const std::array<std::array<double, 2>, 3> centers{{{0.0, 0.0}, {10.0, 0.0}, {5.0, 8.660254}}};
  bool ok = true;
  std::string detail;
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    Rng rng = make_rng(seed, {0x3c});
    std::normal_distribution<double> nd(0.0, 1.0);
    DenseMatrix x(3 * kPer, 2);
    std::vector<int> labels(3 * kPer);
    for (std::size_t r = 0; r < x.rows(); ++r) {
      labels[r] = static_cast<int>(r / kPer);
      x(r, 0) = centers[r / kPer][0] + nd(rng);
      x(r, 1) = centers[r / kPer][1] + nd(rng);
    }
    TsneConfig cfg;
    cfg.seed = seed;
    const TsneResult res = tsne_embed(x, cfg);
    double kl0 = NAN, kl500 = NAN;
    for (const auto& [it, kl] : res.kl_history) {
      if (it == 0) kl0 = kl;
      if (it == 500) kl500 = kl;
    }
    const double sil = oracle::silhouette(res.coords, labels);
    ok = ok && kl500 < kl0 && sil > 0.5;
    detail += fmt(" seed%llu KL %.3f->%.3f sil %.3f;", static_cast<unsigned long long>(seed), kl0, kl500, sil);
  }
  return {ok ? Status::pass : Status::fail, "KL(0)->KL(500), silhouette:" + detail};
}

// ---- 10: WikiCS ----

Outcome wikics_shape(const Options& opts) {
  const auto path = opts.data_dir / "wikics" / "data.json";
  if (opts.data_dir.empty() || !std::filesystem::exists(path)) return {Status::skip, "WikiCS data.json not available offline"};
  const Graph g = load_graph(path, GraphFormat::wikics_json);
  const bool ok = g.num_nodes == 11701 && g.num_edges() == 216123 && g.features.cols() == 300 && g.num_classes == 10 &&
                  g.split.train.size() == 4085 && g.split.val.size() == 1769 && g.split.test.size() == 5847;
  return {ok ? Status::pass : Status::fail,
          fmt("nodes %zu edges %zu d %zu C %d splits %zu/%zu/%zu", g.num_nodes, g.num_edges(), g.features.cols(),
              g.num_classes, g.split.train.size(), g.split.val.size(), g.split.test.size())};
}

const char* criterion_name(int id) {
  switch (id) {
    case 1:
      return "gradient suite";
    case 2:
      return "RBM conditional fidelity";
    case 3:
      return "exact-likelihood oracle";
    case 4:
      return "content-addressable memory";
    case 5:
      return "noise-operator exactness";
    case 6:
      return "pipeline identity";
    case 7:
      return "psi0 outperforms phi under X_z";
    case 8:
      return "grid contracts";
    case 9:
      return "t-SNE descent and separation";
    case 10:
      return "WikiCS loader shape";
  }
  return "?";
}

}  // namespace

SbmParams blanking_sbm(std::uint64_t seed) {
  SbmParams sp;
  sp.num_nodes = 600;
  sp.num_classes = 4;
  sp.p_in = 0.0025;
  sp.p_out = 0.00025;
  sp.feature_dim = 256;
  sp.feature_shift = 1.0;
  sp.seed = 7 + seed;
  return sp;
}

RbmTrainConfig blanking_rbm(std::uint64_t seed) {
  RbmTrainConfig rc;
  rc.hidden_units = 32;
  rc.epochs = 100;
  rc.batch_size = 16;
  rc.lr = 0.01;
  rc.seed = seed;
  return rc;
}

std::string to_string(Status s) {
  switch (s) {
    case Status::pass:
      return "PASS";
    case Status::fail:
      return "FAIL";
    case Status::skip:
      return "SKIP";
  }
  return "?";
}

CriterionResult run_criterion(int id, const Options& opts) {
  if (id < 1 || id > kNumCriteria) throw ArgumentError("no acceptance criterion " + std::to_string(id));
  const auto t0 = std::chrono::steady_clock::now();
  Outcome out;
  try {
    switch (id) {
      case 1:
        out = gradients();
        break;
      case 2:
        out = rbm_conditionals();
        break;
      case 3:
        out = exact_likelihood();
        break;
      case 4:
        out = associative_recall();
        break;
      case 5:
        out = noise_operators();
        break;
      case 6:
        out = pipeline_identity();
        break;
      case 7:
        out = blanking_claim();
        break;
      case 8:
        out = grid_contracts();
        break;
      case 9:
        out = tsne_checks();
        break;
      case 10:
        out = wikics_shape(opts);
        break;
    }
  } catch (const std::exception& e) {
    out = {Status::fail, std::string("threw: ") + e.what()};
  }
  CriterionResult r;
  r.id = id;
  r.name = criterion_name(id);
  r.status = out.status;
  r.detail = out.detail;
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  // Runtime budgets are part of criteria 1 and 7.
  const double budget = id == 1 ? 120.0 : id == 7 ? 600.0 : 0.0;
  if (budget > 0.0 && r.seconds >= budget && r.status == Status::pass) {
    r.status = Status::fail;
    r.detail += fmt(" [over the %.0fs budget]", budget);
  }
  return r;
}

std::vector<CriterionResult> run_all(const Options& opts) {
  std::vector<CriterionResult> out;
  for (int id = 1; id <= kNumCriteria; ++id) out.push_back(run_criterion(id, opts));
  return out;
}

std::string format_line(const CriterionResult& r) {
  return fmt("[%s] %2d %s: %s (%.1fs)", to_string(r.status).c_str(), r.id, r.name.c_str(), r.detail.c_str(), r.seconds);
}

nlohmann::json to_json(const std::vector<CriterionResult>& results) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& r : results)
    j.push_back({{"id", r.id}, {"name", r.name}, {"status", to_string(r.status)}, {"detail", r.detail}, {"seconds", r.seconds}});
  return j;
}

}  // namespace gsr::verify
