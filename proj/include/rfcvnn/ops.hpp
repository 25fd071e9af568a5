#pragma once

// Primitive differentiable operations. Every layer in the library is composed
// from these.

#include <cstddef>
#include <span>

#include "rfcvnn/tensor.hpp"

namespace rfcvnn {

/// (height, width) pair for kernel windows and strides.
struct Extent2 {
  std::size_t h = 1;
  std::size_t w = 1;
  friend bool operator==(const Extent2&, const Extent2&) = default;
};

/// Valid cross-correlation without padding or bias.
/// input [N, C_in, H, W] or [C_in, H, W]; filters [C_out, C_in, kH, kW].
/// Output [N, C_out, H', W'] (rank follows the input) with
/// H' = (H - kH) / sH + 1, W' = (W - kW) / sW + 1.
Tensor conv2d(const Tensor& input, const Tensor& filters, Extent2 stride);

/// max(0, v). The derivative at v == 0 is taken as 0.
Tensor relu(const Tensor& input);

/// Window mean over the two trailing axes. input [N, C, H, W] or [C, H, W].
Tensor avgpool2d(const Tensor& input, Extent2 window, Extent2 stride);

/// Mean over the batch of -log softmax(logits)[label]. logits [N, K].
Tensor softmax_cross_entropy(const Tensor& logits, std::span<const std::size_t> labels);

// Elementwise, same shape.
Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double factor);
Tensor add_scalar(const Tensor& a, double offset);
Tensor sqrt(const Tensor& a);
Tensor reciprocal(const Tensor& a);

inline Tensor operator+(const Tensor& a, const Tensor& b) { return add(a, b); }
inline Tensor operator-(const Tensor& a, const Tensor& b) { return sub(a, b); }
inline Tensor operator*(const Tensor& a, const Tensor& b) { return mul(a, b); }
inline Tensor operator*(double s, const Tensor& a) { return scale(a, s); }

/// Sum of all elements, shape [1].
Tensor sum(const Tensor& a);

/// Same values under a new shape of equal size.
Tensor reshape(const Tensor& a, Shape shape);

/// Per-channel mean of x [N, C, ...] over every axis except 1. Returns [C].
Tensor channel_mean(const Tensor& x);

/// Expands v [C] to `like` ([N, C, ...]) by repeating along every other axis.
Tensor broadcast_channels(const Tensor& v, const Shape& like);

}  // namespace rfcvnn
