#include "rfcvnn/optim.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace rfcvnn {

std::string_view to_string(OptimizerKind kind) {
  return kind == OptimizerKind::kAdam ? "adam" : "sgd-momentum";
}

OptimizerKind parse_optimizer(std::string_view name) {
  if (name == "adam") return OptimizerKind::kAdam;
  if (name == "sgd-momentum" || name == "sgd") return OptimizerKind::kSgdMomentum;
  throw std::invalid_argument("unknown optimizer '" + std::string(name) + "'");
}

void Hyperparams::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
    throw std::invalid_argument("learning rate must be finite and > 0");
  if (batch_size < 2) throw std::invalid_argument("batch size must be >= 2 for batch normalization");
  if (precision != "f64") throw std::invalid_argument("precision '" + precision + "' not supported (only f64)");
}

Optimizer::Optimizer(OptimizerKind kind, double learning_rate, std::vector<Parameter*> params)
    : kind_(kind), lr_(learning_rate), params_(std::move(params)) {
  for (Parameter* p : params_) {
    m_.emplace_back(p->tensor.size(), 0.0);
    v_.emplace_back(kind_ == OptimizerKind::kAdam ? p->tensor.size() : 0, 0.0);
  }
}

void Optimizer::step() {
  ++steps_;
  constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8, momentum = 0.9;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(steps_));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(steps_));
  for (std::size_t i = 0; i < params_.size(); ++i) {
    Parameter& p = *params_[i];
    if (p.frozen_zero) continue;
    const auto g = p.tensor.grad();
    if (g.empty()) continue;
    auto w = p.tensor.mutable_values();
    auto& m = m_[i];
    if (kind_ == OptimizerKind::kAdam) {
      auto& v = v_[i];
      for (std::size_t j = 0; j < w.size(); ++j) {
        m[j] = b1 * m[j] + (1 - b1) * g[j];
        v[j] = b2 * v[j] + (1 - b2) * g[j] * g[j];
        w[j] -= lr_ * (m[j] / c1) / (std::sqrt(v[j] / c2) + eps);
      }
    } else {
      for (std::size_t j = 0; j < w.size(); ++j) {
        m[j] = momentum * m[j] + g[j];
        w[j] -= lr_ * m[j];
      }
    }
  }
}

}  // namespace rfcvnn
