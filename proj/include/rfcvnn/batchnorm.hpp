#pragma once

#include <cstddef>
#include <vector>

#include "rfcvnn/tensor.hpp"

namespace rfcvnn {

enum class Mode { kTrain, kEval };

inline constexpr double kBatchNormEps = 1e-5;
inline constexpr double kBatchNormMomentum = 0.1;

/// Per-channel affine parameters plus running statistics.
struct BatchNormState {
  explicit BatchNormState(std::size_t channels);

  std::size_t channels() const { return running_mean.size(); }

  Tensor gamma;  // [C], init 1
  Tensor beta;   // [C], init 0
  std::vector<double> running_mean;  // init 0
  std::vector<double> running_var;   // init 1, unbiased batch variance
  double momentum = kBatchNormMomentum;
  double eps = kBatchNormEps;
};

/// (v - mean) / sqrt(var + eps) * gamma + beta per channel of x [N, C, ...].
/// Train mode uses biased batch statistics (N >= 2) and updates the running
/// statistics; eval mode uses the running statistics as constants.
Tensor batchnorm_real(const Tensor& input, BatchNormState& state, Mode mode);

}  // namespace rfcvnn
