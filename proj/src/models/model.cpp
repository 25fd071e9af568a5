#include <algorithm>
#include <stdexcept>
#include <string>

#include "models/layers.hpp"
#include "rfcvnn/model.hpp"

namespace rfcvnn {

std::string_view to_string(ModelKind kind) { return kind == ModelKind::kRvnn ? "rvnn" : "cvnn"; }

ModelKind parse_model_kind(std::string_view name) {
  if (name == "rvnn" || name == "RVNN") return ModelKind::kRvnn;
  if (name == "cvnn" || name == "CVNN") return ModelKind::kCvnn;
  throw std::invalid_argument("unknown model kind '" + std::string(name) + "'");
}

std::string layer_output_name(int layer) { return "L" + std::to_string(layer) + ".output"; }

Model::Model(ModelKind kind, ArchConfig arch, std::uint64_t seed, std::vector<std::unique_ptr<Layer>> layers)
    : kind_(kind), arch_(arch), seed_(seed), layers_(std::move(layers)) {}

Layer* Model::find_layer(std::string_view name) const {
  for (const auto& l : layers_)
    if (l->name() == name) return l.get();
  return nullptr;
}

std::vector<Parameter*> Model::parameters() const {
  std::vector<Parameter*> out;
  for (const auto& l : layers_)
    for (Parameter* p : l->parameters()) out.push_back(p);
  return out;
}

std::vector<Buffer> Model::buffers() const {
  std::vector<Buffer> out;
  for (const auto& l : layers_)
    for (Buffer& b : l->buffers()) out.push_back(b);
  return out;
}

ParamCount Model::param_count() const {
  ParamCount c;
  for (const Parameter* p : parameters())
    (p->role == ParamRole::kConvWeight ? c.headline : c.normalization) += p->tensor.size();
  return c;
}

Tensor Model::forward(const Tensor& batch, Mode mode, ForwardTrace* trace) {
  if (layers_.empty()) throw std::logic_error("forward on an empty model");
  if (batch.rank() != 3 || batch.dim(1) != 2 || batch.dim(2) != kSliceLength)
    throw ShapeError("model input must be [N,2," + std::to_string(kSliceLength) + "], got " +
                     to_string(batch.shape()));
  const std::size_t n = batch.dim(0);
  if (mode == Mode::kTrain && n < 2) throw ShapeError("training forward needs a batch of at least 2");

  Activation act;
  if (kind_ == ModelKind::kRvnn) {
    act = Tensor::from({n, 1, 2, kSliceLength}, std::vector<double>(batch.values().begin(), batch.values().end()));
  } else {
    std::vector<double> re(n * kSliceLength), im(n * kSliceLength);
    auto v = batch.values();
    for (std::size_t s = 0; s < n; ++s) {
      std::copy_n(v.data() + s * 2 * kSliceLength, kSliceLength, re.data() + s * kSliceLength);
      std::copy_n(v.data() + (s * 2 + 1) * kSliceLength, kSliceLength, im.data() + s * kSliceLength);
    }
    act = ComplexTensor(Tensor::from({n, 1, 1, kSliceLength}, std::move(re)),
                        Tensor::from({n, 1, 1, kSliceLength}, std::move(im)));
  }

  for (const auto& layer : layers_) {
    act = layer->forward(act, mode);
    if (trace) trace->emplace_back(layer->name(), act);
  }
  const Tensor* logits = std::get_if<Tensor>(&act);
  if (!logits || logits->rank() != 2 || logits->dim(1) != arch_.num_classes)
    throw std::logic_error("model did not produce [N,K] logits");
  return *logits;
}

std::vector<std::size_t> Model::predict(const Tensor& batch) {
  const Tensor logits = forward(batch, Mode::kEval);
  const std::size_t n = logits.dim(0), k = logits.dim(1);
  auto v = logits.values();
  std::vector<std::size_t> out(n);
  for (std::size_t r = 0; r < n; ++r) {
    const double* row = v.data() + r * k;
    out[r] = static_cast<std::size_t>(std::max_element(row, row + k) - row);
  }
  return out;
}

void Model::zero_grad() {
  for (Parameter* p : parameters()) p->tensor.zero_grad();
}

void Model::enforce_frozen() {
  for (Parameter* p : parameters()) {
    if (!p->frozen_zero) continue;
    auto v = p->tensor.mutable_values();
    std::fill(v.begin(), v.end(), 0.0);
    p->tensor.zero_grad();
  }
}

namespace {

void require_classes(std::size_t k) {
  if (k < 2) throw std::invalid_argument("a classifier needs at least 2 classes, got " + std::to_string(k));
}

}  // namespace

Model build_rvnn(std::size_t num_classes, std::uint64_t seed) {
  require_classes(num_classes);
  ArchConfig arch;
  arch.num_classes = num_classes;
  std::mt19937_64 rng(seed);
  std::vector<std::unique_ptr<Layer>> ls;
  ls.push_back(std::make_unique<layers::Conv2d>("L1.conv", arch.rvnn_width, 1, arch.kernel1, arch.stride, rng));
  ls.push_back(std::make_unique<layers::BatchNorm>("L1.bn", arch.rvnn_width));
  ls.push_back(std::make_unique<layers::Relu>("L1.relu"));
  ls.push_back(std::make_unique<layers::Conv2d>("L2.conv", num_classes, arch.rvnn_width, arch.kernel2, arch.stride, rng));
  ls.push_back(std::make_unique<layers::BatchNorm>("L2.bn", num_classes));
  ls.push_back(std::make_unique<layers::Relu>("L2.relu"));
  ls.push_back(std::make_unique<layers::AvgPool>("pool", arch.rvnn_pool, Extent2{1, 1}));
  return Model(ModelKind::kRvnn, arch, seed, std::move(ls));
}

Model build_cvnn(std::size_t num_classes, std::uint64_t seed, ComplexBNVariant bn_variant) {
  require_classes(num_classes);
  ArchConfig arch;
  arch.num_classes = num_classes;
  std::mt19937_64 rng(seed);
  std::vector<std::unique_ptr<Layer>> ls;
  ls.push_back(std::make_unique<layers::ComplexConv>("L1.cconv", arch.cvnn_width, 1, arch.kernel1, arch.stride, rng));
  ls.push_back(std::make_unique<layers::ComplexBatchNorm>("L1.cbn", arch.cvnn_width, bn_variant));
  ls.push_back(std::make_unique<layers::ComplexRelu>("L1.crelu"));
  ls.push_back(
      std::make_unique<layers::ComplexConv>("L2.cconv", num_classes, arch.cvnn_width, arch.kernel2, arch.stride, rng));
  ls.push_back(std::make_unique<layers::ComplexBatchNorm>("L2.cbn", num_classes, bn_variant));
  ls.push_back(std::make_unique<layers::ComplexRelu>("L2.crelu"));
  ls.push_back(std::make_unique<layers::ComplexAvgPool>("pool", arch.cvnn_pool, Extent2{1, 1}));
  ls.push_back(std::make_unique<layers::Magnitude>("magnitude"));
  Model m(ModelKind::kCvnn, arch, seed, std::move(ls));
  m.bn_variant_ = bn_variant;
  return m;
}

Model build_model(ModelKind kind, std::size_t num_classes, std::uint64_t seed, const AblationConfig& ablation) {
  if (kind == ModelKind::kRvnn) {
    if (ablation.active()) throw std::invalid_argument("ablations apply to the CVNN only");
    return build_rvnn(num_classes, seed);
  }
  Model m = build_cvnn(num_classes, seed);
  if (ablation.active()) m = apply_ablation(std::move(m), ablation);
  return m;
}

std::size_t param_count(const Model& model) { return model.param_count().headline; }

Model apply_ablation(Model model, const AblationConfig& cfg) {
  if (model.kind_ != ModelKind::kCvnn)
    throw std::invalid_argument("ablation " + cfg.name() + " requested on an RVNN; ablations apply to the CVNN only");
  if (model.ablation_.active()) throw std::invalid_argument("model is already ablated (" + model.ablation_.name() + ")");
  if (!cfg.active()) return model;

  for (int layer = 1; layer <= 2; ++layer) {
    if (!cfg.covers_layer(layer)) continue;
    const std::string prefix = "L" + std::to_string(layer);
    if (cfg.target == AblationTarget::kConv) {
      auto* conv = dynamic_cast<layers::ComplexConv*>(model.find_layer(prefix + ".cconv"));
      if (!conv) throw std::logic_error("CVNN is missing " + prefix + ".cconv");
      Parameter& p = cfg.part == AblationPart::kReal ? conv->real_part() : conv->imag_part();
      p.frozen_zero = true;
    } else {
      auto it = std::find_if(model.layers_.begin(), model.layers_.end(),
                             [&](const auto& l) { return l->name() == prefix + ".crelu"; });
      if (it == model.layers_.end()) throw std::logic_error("CVNN is missing " + prefix + ".crelu");
      model.layers_.insert(it + 1, std::make_unique<layers::ZeroPart>(layer_output_name(layer), cfg.part));
    }
  }
  model.ablation_ = cfg;
  model.enforce_frozen();
  return model;
}

}  // namespace rfcvnn
