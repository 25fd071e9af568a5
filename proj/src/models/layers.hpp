#pragma once

#include <cstdint>
#include <random>

#include "rfcvnn/model.hpp"

namespace rfcvnn::layers {

class Conv2d final : public Layer {
 public:
  Conv2d(std::string name, std::size_t out_ch, std::size_t in_ch, Extent2 kernel, Extent2 stride,
         std::mt19937_64& rng);
  std::string_view kind() const override { return "conv2d"; }
  Activation forward(const Activation& in, Mode mode) override;
  std::vector<Parameter*> parameters() override { return {&weight_}; }

 private:
  Parameter weight_;
  Extent2 stride_;
};

class BatchNorm final : public Layer {
 public:
  BatchNorm(std::string name, std::size_t channels);
  std::string_view kind() const override { return "batchnorm"; }
  Activation forward(const Activation& in, Mode mode) override;
  std::vector<Parameter*> parameters() override { return {&gamma_, &beta_}; }
  std::vector<Buffer> buffers() override;

 private:
  BatchNormState state_;
  Parameter gamma_;
  Parameter beta_;
};

class Relu final : public Layer {
 public:
  using Layer::Layer;
  std::string_view kind() const override { return "relu"; }
  Activation forward(const Activation& in, Mode mode) override;
};

/// Average pooling followed by flattening to [N, features].
class AvgPool final : public Layer {
 public:
  AvgPool(std::string name, Extent2 window, Extent2 stride) : Layer(std::move(name)), window_(window), stride_(stride) {}
  std::string_view kind() const override { return "avgpool2d"; }
  Activation forward(const Activation& in, Mode mode) override;

 private:
  Extent2 window_;
  Extent2 stride_;
};

class ComplexConv final : public Layer {
 public:
  ComplexConv(std::string name, std::size_t out_ch, std::size_t in_ch, Extent2 kernel, Extent2 stride,
              std::mt19937_64& rng);
  std::string_view kind() const override { return "cconv2d"; }
  Activation forward(const Activation& in, Mode mode) override;
  std::vector<Parameter*> parameters() override { return {&real_, &imag_}; }

  Parameter& real_part() { return real_; }
  Parameter& imag_part() { return imag_; }

 private:
  Parameter real_;  // A
  Parameter imag_;  // B
  Extent2 stride_;
};

class ComplexBatchNorm final : public Layer {
 public:
  ComplexBatchNorm(std::string name, std::size_t channels, ComplexBNVariant variant);
  std::string_view kind() const override { return "cbatchnorm"; }
  Activation forward(const Activation& in, Mode mode) override;
  std::vector<Parameter*> parameters() override { return {&grr_, &gii_, &gri_, &bre_, &bim_}; }
  std::vector<Buffer> buffers() override;

 private:
  ComplexBNState state_;
  Parameter grr_, gii_, gri_, bre_, bim_;
};

class ComplexRelu final : public Layer {
 public:
  using Layer::Layer;
  std::string_view kind() const override { return "crelu"; }
  Activation forward(const Activation& in, Mode mode) override;
};

/// Complex average pooling followed by flattening to [N, features].
class ComplexAvgPool final : public Layer {
 public:
  ComplexAvgPool(std::string name, Extent2 window, Extent2 stride)
      : Layer(std::move(name)), window_(window), stride_(stride) {}
  std::string_view kind() const override { return "cavgpool2d"; }
  Activation forward(const Activation& in, Mode mode) override;

 private:
  Extent2 window_;
  Extent2 stride_;
};

class Magnitude final : public Layer {
 public:
  using Layer::Layer;
  std::string_view kind() const override { return "magnitude"; }
  Activation forward(const Activation& in, Mode mode) override;
};

/// Replaces the real or imaginary part of a complex activation with zeros.
class ZeroPart final : public Layer {
 public:
  ZeroPart(std::string name, AblationPart part) : Layer(std::move(name)), part_(part) {}
  std::string_view kind() const override { return "zero_part"; }
  Activation forward(const Activation& in, Mode mode) override;

 private:
  AblationPart part_;
};

}  // namespace rfcvnn::layers
