#include "models/layers.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace rfcvnn::layers {
namespace {

const Tensor& as_real(const Activation& a, const std::string& layer) {
  if (const auto* t = std::get_if<Tensor>(&a)) return *t;
  throw ShapeError(layer + ": expected a real activation");
}

const ComplexTensor& as_complex(const Activation& a, const std::string& layer) {
  if (const auto* t = std::get_if<ComplexTensor>(&a)) return *t;
  throw ShapeError(layer + ": expected a complex activation");
}

Tensor flatten_batch(const Tensor& t) {
  const std::size_t n = t.dim(0);
  return reshape(t, {n, t.size() / n});
}

}  // namespace

Conv2d::Conv2d(std::string name, std::size_t out_ch, std::size_t in_ch, Extent2 kernel, Extent2 stride,
               std::mt19937_64& rng)
    : Layer(std::move(name)), stride_(stride) {
  const std::size_t fan_in = in_ch * kernel.h * kernel.w;
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in));
  std::uniform_real_distribution<double> dist(-bound, bound);
  std::vector<double> w(out_ch * fan_in);
  for (double& v : w) v = dist(rng);
  weight_ = {this->name() + ".weight", Tensor::from({out_ch, in_ch, kernel.h, kernel.w}, std::move(w), true),
             ParamRole::kConvWeight};
}

Activation Conv2d::forward(const Activation& in, Mode) {
  return conv2d(as_real(in, name()), weight_.tensor, stride_);
}

BatchNorm::BatchNorm(std::string name, std::size_t channels) : Layer(std::move(name)), state_(channels) {
  gamma_ = {this->name() + ".gamma", state_.gamma, ParamRole::kNormAffine};
  beta_ = {this->name() + ".beta", state_.beta, ParamRole::kNormAffine};
}

Activation BatchNorm::forward(const Activation& in, Mode mode) {
  return batchnorm_real(as_real(in, name()), state_, mode);
}

std::vector<Buffer> BatchNorm::buffers() {
  return {{name() + ".running_mean", &state_.running_mean}, {name() + ".running_var", &state_.running_var}};
}

Activation Relu::forward(const Activation& in, Mode) { return relu(as_real(in, name())); }

Activation AvgPool::forward(const Activation& in, Mode) {
  return flatten_batch(avgpool2d(as_real(in, name()), window_, stride_));
}

ComplexConv::ComplexConv(std::string name, std::size_t out_ch, std::size_t in_ch, Extent2 kernel, Extent2 stride,
                         std::mt19937_64& rng)
    : Layer(std::move(name)), stride_(stride) {
  const std::size_t fan_in = in_ch * kernel.h * kernel.w;
  const double sigma = 1.0 / std::sqrt(static_cast<double>(fan_in));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> phase(-std::numbers::pi, std::numbers::pi);
  std::vector<double> a(out_ch * fan_in), b(out_ch * fan_in);
  for (std::size_t i = 0; i < a.size(); ++i) {
    // Rayleigh by inversion: sigma * sqrt(-2 ln(1 - u)).
    const double rho = sigma * std::sqrt(-2.0 * std::log1p(-unit(rng)));
    const double theta = phase(rng);
    a[i] = rho * std::cos(theta);
    b[i] = rho * std::sin(theta);
  }
  const Shape shape{out_ch, in_ch, kernel.h, kernel.w};
  real_ = {this->name() + ".A", Tensor::from(shape, std::move(a), true), ParamRole::kConvWeight};
  imag_ = {this->name() + ".B", Tensor::from(shape, std::move(b), true), ParamRole::kConvWeight};
}

Activation ComplexConv::forward(const Activation& in, Mode) {
  return cconv2d(as_complex(in, name()), {real_.tensor, imag_.tensor}, stride_);
}

ComplexBatchNorm::ComplexBatchNorm(std::string name, std::size_t channels, ComplexBNVariant variant)
    : Layer(std::move(name)), state_(channels, variant) {
  grr_ = {this->name() + ".gamma_rr", state_.gamma_rr, ParamRole::kNormAffine};
  gii_ = {this->name() + ".gamma_ii", state_.gamma_ii, ParamRole::kNormAffine};
  gri_ = {this->name() + ".gamma_ri", state_.gamma_ri, ParamRole::kNormAffine};
  bre_ = {this->name() + ".beta_re", state_.beta_re, ParamRole::kNormAffine};
  bim_ = {this->name() + ".beta_im", state_.beta_im, ParamRole::kNormAffine};
}

Activation ComplexBatchNorm::forward(const Activation& in, Mode mode) {
  return cbatchnorm(as_complex(in, name()), state_, mode);
}

std::vector<Buffer> ComplexBatchNorm::buffers() {
  return {{name() + ".running_mean_re", &state_.running_mean_re},
          {name() + ".running_mean_im", &state_.running_mean_im},
          {name() + ".running_vrr", &state_.running_vrr},
          {name() + ".running_vii", &state_.running_vii},
          {name() + ".running_vri", &state_.running_vri}};
}

Activation ComplexRelu::forward(const Activation& in, Mode) { return crelu(as_complex(in, name())); }

Activation ComplexAvgPool::forward(const Activation& in, Mode) {
  const ComplexTensor pooled = cavgpool(as_complex(in, name()), window_, stride_);
  return ComplexTensor(flatten_batch(pooled.re()), flatten_batch(pooled.im()));
}

Activation Magnitude::forward(const Activation& in, Mode) { return magnitude(as_complex(in, name())); }

Activation ZeroPart::forward(const Activation& in, Mode) {
  const ComplexTensor& h = as_complex(in, name());
  Tensor zero = Tensor::zeros(h.shape());
  if (part_ == AblationPart::kReal) return ComplexTensor(std::move(zero), h.im());
  return ComplexTensor(h.re(), std::move(zero));
}

}  // namespace rfcvnn::layers
