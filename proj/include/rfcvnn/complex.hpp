#pragma once

// Complex-valued layers expressed through real tensors. A complex activation
// h = x + iy is carried as the pair (re = x, im = y); a complex filter bank
// W = A + iB as the pair (A, B).

#include <cstddef>
#include <vector>

#include "rfcvnn/batchnorm.hpp"
#include "rfcvnn/ops.hpp"
#include "rfcvnn/tensor.hpp"

namespace rfcvnn {

class ComplexTensor {
 public:
  ComplexTensor() = default;
  /// Throws ShapeError unless re and im have the same shape.
  ComplexTensor(Tensor re, Tensor im);

  const Tensor& re() const { return re_; }
  const Tensor& im() const { return im_; }
  const Shape& shape() const { return re_.shape(); }
  bool defined() const { return re_.defined(); }

 private:
  Tensor re_;
  Tensor im_;
};

struct ComplexConvFilter {
  Tensor a;  // real part, [C_out, C_in, kH, kW]
  Tensor b;  // imaginary part, same shape
};

enum class ComplexBNVariant {
  kWhitening,  // full 2x2 covariance whitening
  kNaive,      // independent per-component scaling (ablation of the above)
};

inline constexpr double kMagnitudeEps = 1e-12;

struct ComplexBNState {
  explicit ComplexBNState(std::size_t channels, ComplexBNVariant variant = ComplexBNVariant::kWhitening);

  std::size_t channels() const { return running_mean_re.size(); }

  // Scale matrix [[gamma_rr, gamma_ri], [gamma_ri, gamma_ii]] and shift (beta_re, beta_im).
  Tensor gamma_rr;  // init 1/sqrt(2)
  Tensor gamma_ii;  // init 1/sqrt(2)
  Tensor gamma_ri;  // init 0
  Tensor beta_re;
  Tensor beta_im;

  std::vector<double> running_mean_re;
  std::vector<double> running_mean_im;
  std::vector<double> running_vrr;  // init 1
  std::vector<double> running_vii;  // init 1
  std::vector<double> running_vri;  // init 0

  double momentum = kBatchNormMomentum;
  double eps = kBatchNormEps;
  ComplexBNVariant variant;
};

/// Symmetric inverse square root of [[a, b], [b, c]] (positive definite):
/// with s = sqrt(ac - b^2) and t = sqrt(a + c + 2s), V^(-1/2) = [[c + s, -b], [-b, a + s]] / (s t).
struct Sym2 {
  double rr, ri, ii;
};
Sym2 inverse_sqrt_2x2(double a, double b, double c);

/// (A*x - B*y) + i(B*x + A*y)
ComplexTensor cconv2d(const ComplexTensor& h, const ComplexConvFilter& w, Extent2 stride);

/// ReLU applied to re and im independently.
ComplexTensor crelu(const ComplexTensor& h);

/// Centres each channel and whitens it by (V + eps I)^(-1/2), V the 2x2
/// covariance of (re, im) over [N, ..., H, W]. No scale or shift. Train mode
/// needs N >= 2 and updates the running statistics in `state`.
ComplexTensor complex_whiten(const ComplexTensor& h, ComplexBNState& state, Mode mode);

/// complex_whiten followed by the 2x2 scale and complex shift.
ComplexTensor cbatchnorm(const ComplexTensor& h, ComplexBNState& state, Mode mode);

ComplexTensor cavgpool(const ComplexTensor& h, Extent2 window, Extent2 stride);

/// sqrt(re^2 + im^2 + kMagnitudeEps)
Tensor magnitude(const ComplexTensor& h);

}  // namespace rfcvnn
