#include "rfcvnn/batchnorm.hpp"

#include <cmath>
#include <string>

#include "core/autograd.hpp"

namespace rfcvnn {

using detail::Node;

BatchNormState::BatchNormState(std::size_t channels)
    : gamma(Tensor::full({channels}, 1.0, true)),
      beta(Tensor::zeros({channels}, true)),
      running_mean(channels, 0.0),
      running_var(channels, 1.0) {}

Tensor batchnorm_real(const Tensor& input, BatchNormState& state, Mode mode) {
  const Shape& s = input.shape();
  const std::size_t channels = state.channels();
  if (s.size() < 2 || s[1] != channels)
    throw ShapeError("batchnorm_real: input " + to_string(s) + " does not have " + std::to_string(channels) +
                     " channels");
  if (mode == Mode::kTrain && s[0] < 2)
    throw ShapeError("batchnorm_real: training mode needs a batch of at least 2");

  const std::size_t outer = s[0];
  const std::size_t inner = shape_size(s) / (outer * channels);
  const double count = static_cast<double>(outer * inner);
  auto x = input.values();
  auto gamma = state.gamma.values();
  auto beta = state.beta.values();

  std::vector<double> mean(channels, 0.0), inv_std(channels);
  if (mode == Mode::kTrain) {
    std::vector<double> var(channels, 0.0);
    for (std::size_t o = 0; o < outer; ++o)
      for (std::size_t c = 0; c < channels; ++c) {
        const double* p = x.data() + (o * channels + c) * inner;
        for (std::size_t i = 0; i < inner; ++i) mean[c] += p[i];
      }
    for (double& m : mean) m /= count;
    for (std::size_t o = 0; o < outer; ++o)
      for (std::size_t c = 0; c < channels; ++c) {
        const double* p = x.data() + (o * channels + c) * inner;
        for (std::size_t i = 0; i < inner; ++i) var[c] += (p[i] - mean[c]) * (p[i] - mean[c]);
      }
    const double unbias = count / (count - 1.0);
    for (std::size_t c = 0; c < channels; ++c) {
      var[c] /= count;
      inv_std[c] = 1.0 / std::sqrt(var[c] + state.eps);
      state.running_mean[c] = (1.0 - state.momentum) * state.running_mean[c] + state.momentum * mean[c];
      state.running_var[c] = (1.0 - state.momentum) * state.running_var[c] + state.momentum * var[c] * unbias;
    }
  } else {
    for (std::size_t c = 0; c < channels; ++c) {
      mean[c] = state.running_mean[c];
      inv_std[c] = 1.0 / std::sqrt(state.running_var[c] + state.eps);
    }
  }

  auto xhat = std::make_shared<std::vector<double>>(x.size());
  std::vector<double> y(x.size());
  for (std::size_t o = 0; o < outer; ++o)
    for (std::size_t c = 0; c < channels; ++c) {
      const std::size_t at = (o * channels + c) * inner;
      for (std::size_t i = 0; i < inner; ++i) {
        const double h = (x[at + i] - mean[c]) * inv_std[c];
        (*xhat)[at + i] = h;
        y[at + i] = gamma[c] * h + beta[c];
      }
    }

  const bool train = mode == Mode::kTrain;
  return detail::make_result(
      train ? "batchnorm_real" : "batchnorm_real_eval", s, std::move(y), {input, state.gamma, state.beta},
      [=](Node& self) {
        const auto& g = self.grad;
        const auto& xh = *xhat;
        const auto& gam = self.parent(1).value;
        std::vector<double> sum_g(channels, 0.0), sum_gx(channels, 0.0);
        for (std::size_t o = 0; o < outer; ++o)
          for (std::size_t c = 0; c < channels; ++c) {
            const std::size_t at = (o * channels + c) * inner;
            for (std::size_t i = 0; i < inner; ++i) {
              sum_g[c] += g[at + i];
              sum_gx[c] += g[at + i] * xh[at + i];
            }
          }
        if (self.parent_needs_grad(1))
          for (std::size_t c = 0; c < channels; ++c) self.parent(1).grad[c] += sum_gx[c];
        if (self.parent_needs_grad(2))
          for (std::size_t c = 0; c < channels; ++c) self.parent(2).grad[c] += sum_g[c];
        if (!self.parent_needs_grad(0)) return;
        auto& gx = self.parent(0).grad;
        for (std::size_t o = 0; o < outer; ++o)
          for (std::size_t c = 0; c < channels; ++c) {
            const std::size_t at = (o * channels + c) * inner;
            const double k = gam[c] * inv_std[c];
            if (train) {
              const double mg = sum_g[c] / count, mgx = sum_gx[c] / count;
              for (std::size_t i = 0; i < inner; ++i) gx[at + i] += k * (g[at + i] - mg - xh[at + i] * mgx);
            } else {
              for (std::size_t i = 0; i < inner; ++i) gx[at + i] += k * g[at + i];
            }
          }
      });
}

}  // namespace rfcvnn
