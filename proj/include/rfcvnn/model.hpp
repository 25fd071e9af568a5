#pragma once

// The two-layer RVNN and CVNN fingerprinting networks and their ablations.
//
//   RVNN  [N,1,2,100] -> Conv(128,(1,25)/(1,3)) -> BN -> ReLU
//                     -> Conv(K,(1,20)/(1,3))   -> BN -> ReLU -> AvgPool((2,3)/(1,1)) -> K logits
//   CVNN  [N,1,1,100] complex -> CConv(64,(1,25)/(1,3)) -> CBN -> CReLU
//                     -> CConv(K,(1,20)/(1,3)) -> CBN -> CReLU -> CAvgPool((1,3)/(1,1)) -> |z| -> K logits
//
// Convolutions carry no bias, so both networks hold 3200 + 2560 K conv weights.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "rfcvnn/ablation.hpp"
#include "rfcvnn/batchnorm.hpp"
#include "rfcvnn/complex.hpp"
#include "rfcvnn/ops.hpp"
#include "rfcvnn/tensor.hpp"

namespace rfcvnn {

inline constexpr std::size_t kSliceLength = 100;

enum class ModelKind { kRvnn, kCvnn };
std::string_view to_string(ModelKind kind);
ModelKind parse_model_kind(std::string_view name);

struct ArchConfig {
  std::size_t num_classes = 20;
  std::size_t rvnn_width = 128;
  std::size_t cvnn_width = 64;
  Extent2 kernel1{1, 25};
  Extent2 kernel2{1, 20};
  Extent2 stride{1, 3};
  Extent2 rvnn_pool{2, 3};
  Extent2 cvnn_pool{1, 3};
};

using Activation = std::variant<Tensor, ComplexTensor>;

enum class ParamRole { kConvWeight, kNormAffine };

struct Parameter {
  std::string name;
  Tensor tensor;
  ParamRole role = ParamRole::kConvWeight;
  // Held at exactly zero: never updated, gradient discarded.
  bool frozen_zero = false;
};

struct Buffer {
  std::string name;
  std::vector<double>* values;
};

class Layer {
 public:
  explicit Layer(std::string name) : name_(std::move(name)) {}
  virtual ~Layer() = default;

  const std::string& name() const { return name_; }
  virtual std::string_view kind() const = 0;
  virtual Activation forward(const Activation& in, Mode mode) = 0;
  virtual std::vector<Parameter*> parameters() { return {}; }
  virtual std::vector<Buffer> buffers() { return {}; }

 private:
  std::string name_;
};

struct ParamCount {
  std::size_t headline = 0;       // convolution weights
  std::size_t normalization = 0;  // batch-norm scale and shift, reported separately
};

/// Per-layer outputs of one forward pass, in layer order.
using ForwardTrace = std::vector<std::pair<std::string, Activation>>;

class Model {
 public:
  Model() = default;
  Model(ModelKind kind, ArchConfig arch, std::uint64_t seed, std::vector<std::unique_ptr<Layer>> layers);

  ModelKind kind() const { return kind_; }
  const ArchConfig& arch() const { return arch_; }
  std::size_t num_classes() const { return arch_.num_classes; }
  std::uint64_t seed() const { return seed_; }
  const AblationConfig& ablation() const { return ablation_; }
  ComplexBNVariant bn_variant() const { return bn_variant_; }

  const std::vector<std::unique_ptr<Layer>>& layers() const { return layers_; }
  Layer* find_layer(std::string_view name) const;
  std::vector<Parameter*> parameters() const;
  std::vector<Buffer> buffers() const;
  ParamCount param_count() const;

  /// batch [N, 2, 100] -> logits [N, K]. Throws ShapeError on other shapes.
  Tensor forward(const Tensor& batch, Mode mode, ForwardTrace* trace = nullptr);
  /// argmax of eval-mode logits.
  std::vector<std::size_t> predict(const Tensor& batch);

  void zero_grad();
  /// Re-zeroes frozen parameters and their gradients.
  void enforce_frozen();

 private:
  friend Model apply_ablation(Model model, const AblationConfig& cfg);
  friend Model build_cvnn(std::size_t, std::uint64_t, ComplexBNVariant);

  ModelKind kind_ = ModelKind::kRvnn;
  ArchConfig arch_;
  std::uint64_t seed_ = 0;
  AblationConfig ablation_;
  ComplexBNVariant bn_variant_ = ComplexBNVariant::kWhitening;
  std::vector<std::unique_ptr<Layer>> layers_;
};

/// K >= 2; throws std::invalid_argument otherwise. Kaiming-uniform fan-in init.
Model build_rvnn(std::size_t num_classes, std::uint64_t seed);

/// K >= 2. Filters drawn as Rayleigh(1/sqrt(fan_in)) modulus with uniform phase.
Model build_cvnn(std::size_t num_classes, std::uint64_t seed,
                 ComplexBNVariant bn_variant = ComplexBNVariant::kWhitening);

Model build_model(ModelKind kind, std::size_t num_classes, std::uint64_t seed,
                  const AblationConfig& ablation = AblationConfig::none());

/// Headline count (convolution weights only).
std::size_t param_count(const Model& model);

/// Applies `cfg` to a CVNN for both training and evaluation:
///   C: zeroes A (RE) or B (IM) of the chosen layers' filters and freezes them;
///   O: zeroes the chosen part of the chosen layers' output on every forward.
/// Throws std::invalid_argument for an RVNN or a model that is already ablated.
Model apply_ablation(Model model, const AblationConfig& cfg);

/// Names of the layers whose output an O-ablation zeroes ("L1.output", ...).
std::string layer_output_name(int layer);

}  // namespace rfcvnn
