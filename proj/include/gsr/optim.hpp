#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gsr/dense_matrix.hpp"

namespace gsr {

// A named parameter buffer paired with its gradient.
struct ParamView {
  std::string name;
  std::span<double> value;
  std::span<const double> grad;
};

struct AdamConfig {
  double lr = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// One bias-corrected Adam update of `param` at step t (t >= 1).
// Throws NumericError naming the parameter on a non-finite gradient.
void adam_update(std::span<double> param, std::span<const double> grad, std::span<double> m, std::span<double> v,
                 const AdamConfig& cfg, std::uint64_t t, std::string_view name);

class Adam {
 public:
  explicit Adam(AdamConfig cfg) : cfg_(cfg) {}
  void step(std::span<const ParamView> params);
  std::uint64_t steps() const { return t_; }

 private:
  AdamConfig cfg_;
  std::vector<Vector> m_;
  std::vector<Vector> v_;
  std::uint64_t t_ = 0;
};

void sgd_step(std::span<const ParamView> params, double lr);

}  // namespace gsr
