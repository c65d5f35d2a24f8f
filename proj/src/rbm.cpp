#include "gsr/rbm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "gsr/io.hpp"
#include "gsr/kernels.hpp"

namespace gsr {

void GbRbm::validate() const {
  const std::size_t nv = num_visible();
  const std::size_t nh = num_hidden();
  if (visible_bias.size() != nv || sigma.size() != nv) throw DimensionError("GbRbm: visible vectors != |V|");
  if (hidden_bias.size() != nh) throw DimensionError("GbRbm: hidden bias != |H|");
  for (double s : sigma)
    if (!(s > 0.0) || !std::isfinite(s)) throw NumericError("GbRbm: sigma must be positive and finite");
  auto finite = [](std::span<const double> xs) {
    return std::all_of(xs.begin(), xs.end(), [](double x) { return std::isfinite(x); });
  };
  if (!weight.all_finite() || !finite(visible_bias) || !finite(hidden_bias))
    throw NumericError("GbRbm: non-finite parameters");
}

GbRbm GbRbm::init(std::size_t visible, std::size_t hidden, std::uint64_t seed, double weight_std) {
  GbRbm r;
  r.weight = DenseMatrix(visible, hidden);
  Rng rng = make_rng(seed, {0x7b});
  std::normal_distribution<double> n(0.0, weight_std);
  for (double& w : r.weight.values()) w = n(rng);
  r.visible_bias.assign(visible, 0.0);
  r.hidden_bias.assign(hidden, 0.0);
  r.sigma.assign(visible, 1.0);
  return r;
}

Scaler Scaler::fit(const DenseMatrix& z) {
  if (z.rows() == 0) throw ArgumentError("Scaler::fit: no rows");
  Scaler s;
  const auto n = static_cast<double>(z.rows());
  s.mean = column_sums(z);
  for (double& m : s.mean) m /= n;
  s.std.assign(z.cols(), 0.0);
  for (std::size_t r = 0; r < z.rows(); ++r)
    for (std::size_t c = 0; c < z.cols(); ++c) {
      const double d = z(r, c) - s.mean[c];
      s.std[c] += d * d;
    }
  for (double& v : s.std) v = std::max(std::sqrt(v / n), kStdFloor);
  return s;
}

DenseMatrix Scaler::transform(const DenseMatrix& z) const {
  if (z.cols() != dims())
    throw DimensionError("Scaler: input width " + std::to_string(z.cols()) + " != " + std::to_string(dims()));
  DenseMatrix out(z.rows(), z.cols());
  for (std::size_t r = 0; r < z.rows(); ++r)
    for (std::size_t c = 0; c < z.cols(); ++c) out(r, c) = (z(r, c) - mean[c]) / std[c];
  return out;
}

DenseMatrix Scaler::inverse(const DenseMatrix& s) const {
  if (s.cols() != dims())
    throw DimensionError("Scaler: input width " + std::to_string(s.cols()) + " != " + std::to_string(dims()));
  DenseMatrix out(s.rows(), s.cols());
  for (std::size_t r = 0; r < s.rows(); ++r)
    for (std::size_t c = 0; c < s.cols(); ++c) out(r, c) = s(r, c) * std[c] + mean[c];
  return out;
}

void RbmTrainConfig::validate() const {
  if (cd_steps < 1) throw ArgumentError("RbmTrainConfig: cd_steps must be >= 1");
  if (batch_size < 1) throw ArgumentError("RbmTrainConfig: batch_size must be >= 1");
  if (hidden_units < 1) throw ArgumentError("RbmTrainConfig: hidden_units must be >= 1");
  if (!(lr >= 0.0) || !std::isfinite(lr)) throw ArgumentError("RbmTrainConfig: lr must be finite and >= 0");
}

double logistic(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double energy(const GbRbm& rbm, std::span<const double> v, std::span<const double> h) {
  if (v.size() != rbm.num_visible() || h.size() != rbm.num_hidden())
    throw DimensionError("energy: state dimensions do not match the RBM");
  double quad = 0.0;
  double inter = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double d = v[i] - rbm.visible_bias[i];
    quad += d * d / (2.0 * rbm.sigma[i] * rbm.sigma[i]);
    const double vs = v[i] / rbm.sigma[i];
    for (std::size_t j = 0; j < h.size(); ++j) inter += vs * rbm.weight(i, j) * h[j];
  }
  double hb = 0.0;
  for (std::size_t j = 0; j < h.size(); ++j) hb += rbm.hidden_bias[j] * h[j];
  return quad - inter - hb;
}

DenseMatrix hidden_conditional(const GbRbm& rbm, const DenseMatrix& v) {
  if (v.cols() != rbm.num_visible())
    throw DimensionError("hidden_conditional: visible width " + std::to_string(v.cols()) + " != |V| " +
                         std::to_string(rbm.num_visible()));
  DenseMatrix scaled(v.rows(), v.cols());
  for (std::size_t r = 0; r < v.rows(); ++r)
    for (std::size_t c = 0; c < v.cols(); ++c) scaled(r, c) = v(r, c) / rbm.sigma[c];
  DenseMatrix p = kernels::matmul(scaled, rbm.weight);
  add_row_bias(p, rbm.hidden_bias);
  for (double& x : p.values()) x = logistic(x);
  return p;
}

DenseMatrix visible_mean(const GbRbm& rbm, const DenseMatrix& h) {
  if (h.cols() != rbm.num_hidden())
    throw DimensionError("visible_conditional: hidden width " + std::to_string(h.cols()) + " != |H| " +
                         std::to_string(rbm.num_hidden()));
  DenseMatrix mu = kernels::matmul_nt(h, rbm.weight);
  for (std::size_t r = 0; r < mu.rows(); ++r)
    for (std::size_t c = 0; c < mu.cols(); ++c) mu(r, c) = rbm.visible_bias[c] + rbm.sigma[c] * mu(r, c);
  return mu;
}

DenseMatrix visible_conditional(const GbRbm& rbm, const DenseMatrix& h, bool sample, Rng& rng) {
  DenseMatrix mu = visible_mean(rbm, h);
  if (!sample) return mu;
  std::normal_distribution<double> n(0.0, 1.0);
  for (std::size_t r = 0; r < mu.rows(); ++r)
    for (std::size_t c = 0; c < mu.cols(); ++c) mu(r, c) += rbm.sigma[c] * n(rng);
  return mu;
}

DenseMatrix sample_bernoulli(const DenseMatrix& probs, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  DenseMatrix out(probs.rows(), probs.cols());
  for (std::size_t i = 0; i < probs.size(); ++i) out.values()[i] = u(rng) < probs.values()[i] ? 1.0 : 0.0;
  return out;
}

double cd_update(GbRbm& rbm, const DenseMatrix& batch, std::size_t k, double lr, Rng& rng) {
  if (k < 1) throw ArgumentError("cd_update: k must be >= 1");
  if (batch.rows() < 1) throw ArgumentError("cd_update: empty batch");
  const DenseMatrix ph0 = hidden_conditional(rbm, batch);
  DenseMatrix vk;
  DenseMatrix phk = ph0;
  for (std::size_t step = 1; step <= k; ++step) {
    const DenseMatrix h = sample_bernoulli(phk, rng);
    vk = visible_conditional(rbm, h, step < k, rng);
    phk = hidden_conditional(rbm, vk);
  }

  const std::size_t nv = rbm.num_visible();
  const auto n = static_cast<double>(batch.rows());
  DenseMatrix v0s(batch.rows(), nv);
  DenseMatrix vks(batch.rows(), nv);
  double err = 0.0;
  Vector dvb(nv, 0.0);
  for (std::size_t r = 0; r < batch.rows(); ++r)
    for (std::size_t c = 0; c < nv; ++c) {
      v0s(r, c) = batch(r, c) / rbm.sigma[c];
      vks(r, c) = vk(r, c) / rbm.sigma[c];
      const double d = batch(r, c) - vk(r, c);
      err += d * d;
      dvb[c] += d / (rbm.sigma[c] * rbm.sigma[c]);
    }
  const DenseMatrix pos = kernels::matmul_tn(v0s, ph0);
  const DenseMatrix neg = kernels::matmul_tn(vks, phk);
  const Vector hpos = column_sums(ph0);
  const Vector hneg = column_sums(phk);

  const double step = lr / n;
  for (std::size_t i = 0; i < rbm.weight.size(); ++i)
    rbm.weight.values()[i] += step * (pos.values()[i] - neg.values()[i]);
  for (std::size_t c = 0; c < nv; ++c) rbm.visible_bias[c] += step * dvb[c];
  for (std::size_t j = 0; j < rbm.num_hidden(); ++j) rbm.hidden_bias[j] += step * (hpos[j] - hneg[j]);
  rbm.validate();
  return err / (n * static_cast<double>(nv));
}

RbmTrainResult train_rbm(const DenseMatrix& z, const RbmTrainConfig& cfg) {
  cfg.validate();
  if (z.rows() < cfg.batch_size)
    throw ArgumentError("train_rbm: " + std::to_string(z.rows()) + " rows is fewer than batch size " +
                        std::to_string(cfg.batch_size));
  RbmTrainResult res;
  res.scaler = Scaler::fit(z);
  const DenseMatrix s = res.scaler.transform(z);
  res.rbm = GbRbm::init(z.cols(), cfg.hidden_units, cfg.seed);
  Rng rng = make_rng(cfg.seed, {0xcd});
  std::vector<std::size_t> order(s.rows());
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double err = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + cfg.batch_size);
      const DenseMatrix batch = s.select_rows(std::span<const std::size_t>(order).subspan(start, end - start));
      err += cd_update(res.rbm, batch, cfg.cd_steps, cfg.lr, rng);
      ++batches;
    }
    res.epoch_error.push_back(err / static_cast<double>(batches));
  }
  return res;
}

DenseMatrix reconstruct(const GbRbm& rbm, const Scaler& scaler, const DenseMatrix& z_noisy,
                        const ReconstructOptions& opts) {
  if (opts.gibbs_rounds < 1) throw ArgumentError("reconstruct: gibbs_rounds must be >= 1");
  if (scaler.dims() != rbm.num_visible()) throw DimensionError("reconstruct: scaler width != |V|");
  DenseMatrix v = scaler.transform(z_noisy);
  Rng rng = make_rng(opts.seed, {0x2ec});
  for (std::size_t round = 0; round < opts.gibbs_rounds; ++round) {
    const DenseMatrix ph = hidden_conditional(rbm, v);
    const bool last = round + 1 == opts.gibbs_rounds;
    if (opts.sample && !last)
      v = visible_conditional(rbm, sample_bernoulli(ph, rng), true, rng);
    else
      v = visible_mean(rbm, ph);
  }
  return scaler.inverse(v);
}

namespace {
constexpr std::uint32_t kRbmVersion = 1;
}

void save_rbm(const RbmCheckpoint& ckpt, const std::filesystem::path& path) {
  io::BinaryWriter w;
  w.put_magic("GSRR");
  w.put<std::uint32_t>(kRbmVersion);
  w.put_matrix(ckpt.rbm.weight);
  w.put_array<double>(ckpt.rbm.visible_bias);
  w.put_array<double>(ckpt.rbm.hidden_bias);
  w.put_array<double>(ckpt.rbm.sigma);
  w.put_array<double>(ckpt.scaler.mean);
  w.put_array<double>(ckpt.scaler.std);
  w.put<std::uint64_t>(ckpt.config.hidden_units);
  w.put<std::uint64_t>(ckpt.config.epochs);
  w.put<std::uint64_t>(ckpt.config.batch_size);
  w.put<std::uint64_t>(ckpt.config.cd_steps);
  w.put<double>(ckpt.config.lr);
  w.put<std::uint64_t>(ckpt.config.seed);
  io::write_file_atomic(path, w.bytes());
}

RbmCheckpoint load_rbm(const std::filesystem::path& path) {
  io::BinaryReader r(io::read_file(path), path.string());
  r.expect_magic("GSRR");
  const auto version = r.get<std::uint32_t>("version");
  if (version != kRbmVersion) r.fail("version", "unsupported version " + std::to_string(version));
  RbmCheckpoint c;
  c.rbm.weight = r.get_matrix("weight");
  c.rbm.visible_bias = r.get_array<double>("visible_bias");
  c.rbm.hidden_bias = r.get_array<double>("hidden_bias");
  c.rbm.sigma = r.get_array<double>("sigma");
  c.scaler.mean = r.get_array<double>("scaler.mean");
  c.scaler.std = r.get_array<double>("scaler.std");
  c.config.hidden_units = r.get<std::uint64_t>("config.hidden_units");
  c.config.epochs = r.get<std::uint64_t>("config.epochs");
  c.config.batch_size = r.get<std::uint64_t>("config.batch_size");
  c.config.cd_steps = r.get<std::uint64_t>("config.cd_steps");
  c.config.lr = r.get<double>("config.lr");
  c.config.seed = r.get<std::uint64_t>("config.seed");
  if (!r.at_end()) r.fail("trailer", "unexpected trailing bytes");
  c.rbm.validate();
  if (c.scaler.dims() != c.rbm.num_visible() || c.scaler.std.size() != c.scaler.dims())
    r.fail("scaler", "width does not match the RBM");
  return c;
}

}  // namespace gsr
