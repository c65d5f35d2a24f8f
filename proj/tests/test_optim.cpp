#include <doctest.h>

#include <cmath>
#include <string>

#include "gsr/optim.hpp"

using namespace gsr;

TEST_CASE("adam first step with constant unit gradient") {
  std::vector<double> p{1.0}, g{1.0}, m{0.0}, v{0.0};
  AdamConfig cfg;
  cfg.lr = 0.1;
  adam_update(p, g, m, v, cfg, 1, "w");
  CHECK(p[0] == doctest::Approx(0.9).epsilon(1e-7));
}

TEST_CASE("adam leaves params fixed under zero gradients and decays moments") {
  std::vector<double> p{0.3, -2.0}, g{0.0, 0.0}, m{0.5, 0.5}, v{0.2, 0.2};
  const auto p0 = p;
  AdamConfig cfg;
  adam_update(p, g, m, v, cfg, 3, "w");
  // moments decay
  CHECK(m[0] == doctest::Approx(0.45));
  CHECK(v[0] == doctest::Approx(0.2 * 0.999));
  std::vector<double> mz{0.0, 0.0}, vz{0.0, 0.0};
  p = p0;
  adam_update(p, g, mz, vz, cfg, 1, "w");
  CHECK(p == p0);
}

TEST_CASE("adam is deterministic over repeated runs") {
  auto run = [] {
    std::vector<double> w(5, 0.0), grad(5);
    Adam opt(AdamConfig{});
    for (int step = 0; step < 10; ++step) {
      for (std::size_t i = 0; i < w.size(); ++i) grad[i] = std::sin(0.3 * static_cast<double>(i + step)) + w[i];
      std::vector<ParamView> views{{"w", w, grad}};
      opt.step(views);
    }
    return w;
  };
  CHECK(run() == run());
}

TEST_CASE("non-finite gradient names the parameter") {
  std::vector<double> p{1.0}, g{std::nan("")}, m{0.0}, v{0.0};
  try {
    adam_update(p, g, m, v, AdamConfig{}, 1, "layer2.weight");
    FAIL("expected NumericError");
  } catch (const NumericError& e) {
    CHECK(std::string(e.what()).find("layer2.weight") != std::string::npos);
  }
}

TEST_CASE("sgd step") {
  std::vector<double> w{1.0, 2.0}, g{0.5, -1.0};
  std::vector<ParamView> views{{"w", w, g}};
  sgd_step(views, 0.1);
  CHECK(w[0] == doctest::Approx(0.95));
  CHECK(w[1] == doctest::Approx(2.1));
}
