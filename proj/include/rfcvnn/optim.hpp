#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "rfcvnn/model.hpp"

namespace rfcvnn {

enum class OptimizerKind { kAdam, kSgdMomentum };
std::string_view to_string(OptimizerKind kind);
/// "adam" or "sgd-momentum".
OptimizerKind parse_optimizer(std::string_view name);

struct Hyperparams {
  OptimizerKind optimizer = OptimizerKind::kAdam;
  double learning_rate = 1e-3;
  std::size_t batch_size = 64;
  std::size_t epochs = 30;
  std::uint64_t seed = 0;
  // Only "f64" is implemented.
  std::string precision = "f64";

  /// Throws std::invalid_argument: lr must be finite and > 0, batch >= 2.
  void validate() const;
};

/// Adam (0.9, 0.999, 1e-8) or SGD with momentum 0.9. Parameters flagged
/// frozen_zero are skipped.
class Optimizer {
 public:
  Optimizer(OptimizerKind kind, double learning_rate, std::vector<Parameter*> params);

  void step();
  std::size_t steps() const { return steps_; }

 private:
  OptimizerKind kind_;
  double lr_;
  std::vector<Parameter*> params_;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
  std::size_t steps_ = 0;
};

}  // namespace rfcvnn
