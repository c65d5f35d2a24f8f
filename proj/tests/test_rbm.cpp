#include <doctest.h>

#include <cmath>

#include "gsr/rbm.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace gsr;
using gsr::test::gaussian;

namespace {

GbRbm scalar_rbm(double bv, double sigma, double w, double bh) {
  GbRbm r;
  r.weight = DenseMatrix{{w}};
  r.visible_bias = {bv};
  r.sigma = {sigma};
  r.hidden_bias = {bh};
  return r;
}

double l2(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

DenseMatrix jittered(const std::vector<std::vector<double>>& patterns, std::size_t rows, double jitter, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  std::normal_distribution<double> nd(0.0, jitter);
  DenseMatrix m(rows, patterns[0].size());
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t i = 0; i < m.cols(); ++i) m(r, i) = patterns[r % patterns.size()][i] + nd(rng);
  return m;
}

}  // namespace

TEST_CASE("energy examples") {
  GbRbm zero = GbRbm::init(2, 3, 0, 0.0);
  const std::vector<double> v0(2, 0.0), h0(3, 0.0);
  CHECK(energy(zero, v0, h0) == 0.0);

  const GbRbm r = scalar_rbm(0.0, 1.0, 0.5, 0.2);
  const std::vector<double> one{1.0};
  CHECK(energy(r, one, one) == doctest::Approx(-0.2));

  const std::vector<double> zero_h{0.0};
  const std::vector<double> two{2.0};
  CHECK(energy(scalar_rbm(0.0, 2.0, 0.0, 0.0), two, zero_h) ==
        doctest::Approx(energy(scalar_rbm(0.0, 1.0, 0.0, 0.0), one, zero_h)));
  CHECK_THROWS_AS(energy(r, v0, one), DimensionError);
}

TEST_CASE("hidden_conditional examples") {
  const GbRbm flat = GbRbm::init(3, 2, 0, 0.0);
  const DenseMatrix p = hidden_conditional(flat, gaussian(4, 3, 1));
  for (double x : p.values()) CHECK(x == 0.5);

  const DenseMatrix two{{2.0}};
  CHECK(hidden_conditional(scalar_rbm(0, 1, 1, -1), two)(0, 0) == doctest::Approx(0.73106).epsilon(1e-5));
  const double sat = hidden_conditional(scalar_rbm(0, 1, 1, 1000), two)(0, 0);
  CHECK(std::isfinite(sat));
  CHECK(sat == doctest::Approx(1.0));
  CHECK_THROWS_AS(hidden_conditional(flat, DenseMatrix(1, 2)), DimensionError);
}

TEST_CASE("hidden_conditional matches the energy-difference oracle") {
  GbRbm r = GbRbm::init(4, 3, 5, 0.7);
  r.sigma = {0.5, 1.0, 1.5, 3.0};
  r.visible_bias = {0.1, -0.2, 0.3, 1.0};
  r.hidden_bias = {-0.5, 0.0, 0.8};
  const DenseMatrix v = gaussian(6, 4, 2, 2.0);
  const DenseMatrix p = hidden_conditional(r, v);
  for (std::size_t row = 0; row < 6; ++row)
    for (std::size_t j = 0; j < 3; ++j) CHECK(std::abs(p(row, j) - oracle::hidden_probability(r, v.row(row), j)) < 1e-12);
}

TEST_CASE("visible_conditional examples") {
  Rng rng = make_rng(3);
  GbRbm decoupled = GbRbm::init(2, 2, 0, 0.0);
  decoupled.visible_bias = {0.7, -1.2};
  const DenseMatrix mean = visible_conditional(decoupled, DenseMatrix{{1, 0}, {1, 1}}, false, rng);
  CHECK(mean == DenseMatrix{{0.7, -1.2}, {0.7, -1.2}});

  const GbRbm r = scalar_rbm(0.3, 2.0, 0.5, 0.0);
  CHECK(visible_conditional(r, DenseMatrix{{1.0}}, false, rng)(0, 0) == doctest::Approx(1.3));

  const std::size_t n = 100000;
  const DenseMatrix s = visible_conditional(r, DenseMatrix(n, 1, 1.0), true, rng);
  double m = 0.0;
  for (double x : s.values()) m += x;
  m /= n;
  double var = 0.0;
  for (double x : s.values()) var += (x - m) * (x - m);
  var /= n - 1;
  CHECK(std::abs(m - 1.3) < 3.0 * 2.0 / std::sqrt(static_cast<double>(n)));
  CHECK(std::abs(var - 4.0) < 0.05 * 4.0);
}

TEST_CASE("gibbs chain mean matches the exact marginal") {
  GbRbm r;
  r.weight = DenseMatrix{{0.8, -0.5}, {0.3, 0.9}};
  r.visible_bias = {0.2, -0.4};
  r.sigma = {1.0, 0.7};
  r.hidden_bias = {-0.3, 0.4};

  // enumerate h; v | h is Gaussian with mean b + sigma W h
  std::vector<double> logw, mu0, mu1;
  for (int bits = 0; bits < 4; ++bits) {
    const double h[2] = {static_cast<double>(bits & 1), static_cast<double>((bits >> 1) & 1)};
    double lw = r.hidden_bias[0] * h[0] + r.hidden_bias[1] * h[1];
    double mu[2];
    for (int i = 0; i < 2; ++i) {
      const double a = r.weight(i, 0) * h[0] + r.weight(i, 1) * h[1];
      lw += r.visible_bias[i] * a / r.sigma[i] + a * a / 2.0;
      mu[i] = r.visible_bias[i] + r.sigma[i] * a;
    }
    logw.push_back(lw);
    mu0.push_back(mu[0]);
    mu1.push_back(mu[1]);
  }
  double z = 0.0, e0 = 0.0, e1 = 0.0;
  for (int k = 0; k < 4; ++k) z += std::exp(logw[k]);
  for (int k = 0; k < 4; ++k) {
    e0 += std::exp(logw[k]) / z * mu0[k];
    e1 += std::exp(logw[k]) / z * mu1[k];
  }

  const std::size_t chains = 20000;
  Rng rng = make_rng(17);
  DenseMatrix v(chains, 2);
  for (int step = 0; step < 200; ++step)
    v = visible_conditional(r, sample_bernoulli(hidden_conditional(r, v), rng), true, rng);
  for (std::size_t i = 0; i < 2; ++i) {
    double m = 0.0, sq = 0.0;
    for (std::size_t c = 0; c < chains; ++c) m += v(c, i);
    m /= chains;
    for (std::size_t c = 0; c < chains; ++c) sq += (v(c, i) - m) * (v(c, i) - m);
    const double se = std::sqrt(sq / (chains - 1) / chains);
    CHECK(std::abs(m - (i == 0 ? e0 : e1)) < 3.0 * se);
  }
}

TEST_CASE("cd_update at the fixed point keeps W small") {
  const DenseMatrix batch = gaussian(200, 4, 4);
  GbRbm r = GbRbm::init(4, 6, 0, 0.0);
  r.visible_bias = column_sums(batch);
  for (double& b : r.visible_bias) b /= 200.0;
  Rng rng = make_rng(5);
  for (int i = 0; i < 200; ++i) cd_update(r, batch, 1, 0.01, rng);
  CHECK(frobenius_norm(r.weight) < 0.05);
}

TEST_CASE("cd_update memorizes a repeated pattern") {
  const DenseMatrix batch = jittered({{1.0, -1.0, 2.0, 0.5}}, 10, 0.0, 0);
  GbRbm r = GbRbm::init(4, 8, 6);
  Rng rng = make_rng(6);
  const double first = cd_update(r, batch, 1, 0.01, rng);
  double last = first;
  for (int i = 1; i < 500; ++i) last = cd_update(r, batch, 1, 0.01, rng);
  CHECK(last < first);
}

TEST_CASE("cd_update with zero learning rate is a no-op") {
  GbRbm r = GbRbm::init(3, 4, 7, 0.3);
  const GbRbm before = r;
  Rng rng = make_rng(7);
  cd_update(r, gaussian(8, 3, 8), 2, 0.0, rng);
  CHECK(r == before);
  CHECK_THROWS_AS(cd_update(r, DenseMatrix(0, 3), 1, 0.1, rng), ArgumentError);
}

TEST_CASE("cd_update surfaces divergence") {
  GbRbm r = GbRbm::init(3, 4, 7, 0.3);
  Rng rng = make_rng(7);
  CHECK_THROWS_AS(
      [&] {
        for (int i = 0; i < 50; ++i) cd_update(r, gaussian(8, 3, 9, 1e200), 1, 1e200, rng);
      }(),
      NumericError);
}

TEST_CASE("train_rbm pulls noisy cluster points back to their cluster") {
  std::vector<double> a(8, 2.0), b(8, -2.0);
  const DenseMatrix z = jittered({a, b}, 400, 0.3, 9);
  RbmTrainConfig cfg;
  cfg.hidden_units = 32;
  cfg.epochs = 200;
  cfg.batch_size = 16;
  cfg.seed = 3;
  const RbmTrainResult res = train_rbm(z, cfg);
  CHECK(res.epoch_error.size() == 200);

  // Mahalanobis radius 2 under the cluster's isotropic std 0.3
  const DenseMatrix clean_a = jittered({a}, 1000, 0.3, 10);
  DenseMatrix cues = res.scaler.transform(clean_a);
  Rng rng = make_rng(11);
  std::normal_distribution<double> nd(0.0, 0.5);
  for (double& x : cues.values()) x += nd(rng);
  const DenseMatrix out = reconstruct(res.rbm, res.scaler, res.scaler.inverse(cues));
  int inside = 0;
  for (std::size_t t = 0; t < out.rows(); ++t) inside += l2(out.row(t), a) / 0.3 <= 2.0 ? 1 : 0;
  CHECK(inside >= 900);
}

TEST_CASE("train_rbm edge cases") {
  const DenseMatrix z = gaussian(32, 3, 12);
  RbmTrainConfig cfg;
  cfg.hidden_units = 5;
  cfg.epochs = 0;
  cfg.batch_size = 8;
  cfg.seed = 2;
  const RbmTrainResult res = train_rbm(z, cfg);
  CHECK(res.rbm == GbRbm::init(3, 5, 2));
  CHECK(res.scaler == Scaler::fit(z));
  cfg.epochs = 5;
  CHECK(train_rbm(z, cfg).rbm == train_rbm(z, cfg).rbm);
  cfg.batch_size = 64;
  CHECK_THROWS_AS(train_rbm(z, cfg), ArgumentError);
}

TEST_CASE("reconstruct recovers stored patterns") {
  const std::vector<double> p{1.0, -1.0, 1.0, -1.0, 1.0, 1.0, -1.0, -1.0};
  const std::vector<double> q{1.0, 1.0, -1.0, -1.0, -1.0, 1.0, 1.0, -1.0};
  RbmTrainConfig cfg;
  cfg.hidden_units = 16;
  cfg.epochs = 100;
  cfg.batch_size = 10;
  cfg.seed = 1;

  SUBCASE("single pattern") {
    const RbmTrainResult res = train_rbm(jittered({p}, 100, 0.05, 3), cfg);
    const DenseMatrix in(1, 8, std::vector<double>(p));
    const DenseMatrix out = reconstruct(res.rbm, res.scaler, in);
    CHECK(l2(out.row(0), p) <= 0.1 * std::sqrt(8.0));
    CHECK(reconstruct(res.rbm, res.scaler, in) == out);
  }
  SUBCASE("two orthogonal patterns") {
    const RbmTrainResult res = train_rbm(jittered({p, q}, 200, 0.1, 4), cfg);
    const DenseMatrix cue = jittered({p}, 50, 0.2, 5);
    const DenseMatrix out = reconstruct(res.rbm, res.scaler, cue);
    for (std::size_t t = 0; t < out.rows(); ++t) CHECK(l2(out.row(t), p) < l2(out.row(t), q));
  }
}

TEST_CASE("reconstruct argument checks") {
  const GbRbm r = GbRbm::init(3, 2, 0);
  const Scaler s = Scaler::fit(gaussian(10, 3, 1));
  ReconstructOptions opts;
  opts.gibbs_rounds = 0;
  CHECK_THROWS_AS(reconstruct(r, s, gaussian(2, 3, 2), opts), ArgumentError);
  CHECK_THROWS_AS(reconstruct(r, Scaler::fit(gaussian(10, 4, 1)), gaussian(2, 4, 2)), DimensionError);
}

TEST_CASE("scaler round trip and floor") {
  DenseMatrix z = gaussian(20, 4, 13, 5.0);
  for (std::size_t r = 0; r < 20; ++r) z(r, 3) = 2.5;
  const Scaler s = Scaler::fit(z);
  CHECK(s.std[3] == Scaler::kStdFloor);
  const DenseMatrix back = s.inverse(s.transform(z));
  for (std::size_t i = 0; i < z.size(); ++i) CHECK(std::abs(back.values()[i] - z.values()[i]) < 1e-9);
}

TEST_CASE("logistic is overflow safe") {
  CHECK(logistic(1e4) == 1.0);
  CHECK(logistic(-1e4) >= 0.0);
  CHECK(std::isfinite(logistic(-1e4)));
  CHECK(logistic(0.0) == 0.5);
}

TEST_CASE("rbm checkpoint round trip") {
  gsr::test::TempDir dir;
  RbmCheckpoint c;
  c.rbm = GbRbm::init(4, 3, 1, 0.2);
  c.scaler = Scaler::fit(gaussian(10, 4, 2));
  c.config.hidden_units = 3;
  save_rbm(c, dir / "r.bin");
  const RbmCheckpoint back = load_rbm(dir / "r.bin");
  CHECK(back.rbm == c.rbm);
  CHECK(back.scaler == c.scaler);
  CHECK(back.config == c.config);
}
