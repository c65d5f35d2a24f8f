#include "gsr/optim.hpp"

#include <cmath>

namespace gsr {

void adam_update(std::span<double> param, std::span<const double> grad, std::span<double> m, std::span<double> v,
                 const AdamConfig& cfg, std::uint64_t t, std::string_view name) {
  if (t == 0) throw ArgumentError("adam_update: step count must be >= 1");
  if (grad.size() != param.size() || m.size() != param.size() || v.size() != param.size())
    throw DimensionError("adam_update: buffer size mismatch for " + std::string(name));
  for (double g : grad)
    if (!std::isfinite(g)) throw NumericError("non-finite gradient in parameter " + std::string(name));
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(t));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(t));
  for (std::size_t i = 0; i < param.size(); ++i) {
    m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * grad[i];
    v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * grad[i] * grad[i];
    const double m_hat = m[i] / bc1;
    const double v_hat = v[i] / bc2;
    param[i] -= cfg.lr * m_hat / (std::sqrt(v_hat) + cfg.eps);
  }
}

void Adam::step(std::span<const ParamView> params) {
  if (m_.empty()) {
    for (const auto& p : params) {
      m_.emplace_back(p.value.size(), 0.0);
      v_.emplace_back(p.value.size(), 0.0);
    }
  }
  if (m_.size() != params.size()) throw StateError("Adam: parameter list changed between steps");
  ++t_;
  for (std::size_t i = 0; i < params.size(); ++i)
    adam_update(params[i].value, params[i].grad, m_[i], v_[i], cfg_, t_, params[i].name);
}

void sgd_step(std::span<const ParamView> params, double lr) {
  for (const auto& p : params) {
    for (double g : p.grad)
      if (!std::isfinite(g)) throw NumericError("non-finite gradient in parameter " + p.name);
    for (std::size_t i = 0; i < p.value.size(); ++i) p.value[i] -= lr * p.grad[i];
  }
}

}  // namespace gsr
