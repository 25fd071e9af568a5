#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "rfcvnn/checkpoint.hpp"
#include "rfcvnn/model.hpp"
#include "rfcvnn/optim.hpp"
#include "rfcvnn/simd/kernels.hpp"
#include "test_util.hpp"

namespace rfcvnn {
namespace {

using testing::random_tensor;

Tensor random_batch(std::size_t n, std::mt19937_64& rng) { return random_tensor({n, 2, kSliceLength}, rng); }

std::vector<double> values_of(const Tensor& t) { return {t.values().begin(), t.values().end()}; }

TEST(ParamCount, HeadlineFigures) {
  EXPECT_EQ(param_count(build_rvnn(20, 1)), 54400u);
  EXPECT_EQ(param_count(build_cvnn(20, 1)), 54400u);
  EXPECT_EQ(param_count(build_rvnn(25, 1)), 67200u);
  EXPECT_EQ(param_count(build_cvnn(25, 1)), 67200u);
  EXPECT_EQ(param_count(Model{}), 0u);
}

TEST(ParamCount, ParityAcrossClassCounts) {
  for (std::size_t k = 2; k <= 40; ++k) {
    EXPECT_EQ(param_count(build_rvnn(k, 3)), param_count(build_cvnn(k, 3))) << k;
    EXPECT_EQ(param_count(build_rvnn(k, 3)), 128u * 25u + 20u * k * 128u);
  }
}

TEST(ParamCount, NormalizationReportedSeparately) {
  EXPECT_EQ(build_rvnn(20, 1).param_count().normalization, 2u * (128 + 20));
  EXPECT_EQ(build_cvnn(20, 1).param_count().normalization, 5u * (64 + 20));
}

TEST(Build, RejectsFewerThanTwoClasses) {
  EXPECT_THROW(build_rvnn(1, 0), std::invalid_argument);
  EXPECT_THROW(build_cvnn(0, 0), std::invalid_argument);
}

TEST(Build, LayerOrder) {
  std::vector<std::string> names;
  const Model r = build_rvnn(5, 0), c = build_cvnn(5, 0);
  for (const auto& l : r.layers()) names.push_back(l->name());
  EXPECT_EQ(names, (std::vector<std::string>{"L1.conv", "L1.bn", "L1.relu", "L2.conv", "L2.bn", "L2.relu", "pool"}));
  names.clear();
  for (const auto& l : c.layers()) names.push_back(l->name());
  EXPECT_EQ(names, (std::vector<std::string>{"L1.cconv", "L1.cbn", "L1.crelu", "L2.cconv", "L2.cbn", "L2.crelu", "pool",
                                             "magnitude"}));
}

TEST(Forward, ZeroInputGivesLogK) {
  for (ModelKind kind : {ModelKind::kRvnn, ModelKind::kCvnn})
    for (std::size_t k : {2u, 5u, 20u}) {
      Model m = build_model(kind, k, 7);
      const std::vector<std::size_t> labels{0, k - 1};
      for (Mode mode : {Mode::kTrain, Mode::kEval}) {
        const Tensor logits = m.forward(Tensor::zeros({2, 2, kSliceLength}), mode);
        for (double v : logits.values()) EXPECT_TRUE(std::isfinite(v));
        EXPECT_NEAR(softmax_cross_entropy(logits, labels).item(), std::log(static_cast<double>(k)), 1e-9);
      }
    }
}

TEST(Forward, ShapesAndNonNegativeMagnitudes) {
  std::mt19937_64 rng(1);
  Model r = build_rvnn(20, 1), c = build_cvnn(20, 1);
  const Tensor batch = random_batch(6, rng);
  EXPECT_EQ(r.forward(batch, Mode::kEval).shape(), (Shape{6, 20}));
  const Tensor lc = c.forward(batch, Mode::kTrain);
  EXPECT_EQ(lc.shape(), (Shape{6, 20}));
  for (double v : lc.values()) EXPECT_GE(v, 0.0);
  EXPECT_THROW(r.forward(Tensor::zeros({2, 1, kSliceLength}), Mode::kEval), ShapeError);
  EXPECT_THROW(c.forward(Tensor::zeros({2, 2, 99}), Mode::kEval), ShapeError);
  EXPECT_THROW(c.forward(Tensor::zeros({1, 2, kSliceLength}), Mode::kTrain), ShapeError);
}

TEST(Forward, EvalIsDeterministicAndPredictIsArgmax) {
  std::mt19937_64 rng(2);
  Model m = build_cvnn(6, 2);
  const Tensor batch = random_batch(9, rng);
  const Tensor a = m.forward(batch, Mode::kEval), b = m.forward(batch, Mode::kEval);
  EXPECT_EQ(values_of(a), values_of(b));
  const auto pred = m.predict(batch);
  ASSERT_EQ(pred.size(), 9u);
  for (std::size_t n = 0; n < 9; ++n) {
    const auto row = a.values().subspan(n * 6, 6);
    EXPECT_EQ(pred[n], static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin()));
  }
}

TEST(Forward, SameSeedSameWeights) {
  const Model a = build_cvnn(5, 11), b = build_cvnn(5, 11), c = build_cvnn(5, 12);
  const auto pa = a.parameters(), pb = b.parameters(), pc = c.parameters();
  EXPECT_EQ(values_of(pa[0]->tensor), values_of(pb[0]->tensor));
  EXPECT_NE(values_of(pa[0]->tensor), values_of(pc[0]->tensor));
}

// Frozen output of this implementation under the scalar kernels: seed 2024,
// K = 4, two slices of the fixed pattern below, eval mode after one train pass.
Tensor golden_input() {
  std::vector<double> v(2 * 2 * kSliceLength);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::sin(0.37 * static_cast<double>(i)) + 0.01 * static_cast<double>(i % 7);
  return Tensor::from({2, 2, kSliceLength}, v);
}

std::vector<double> golden_logits(ModelKind kind) {
  simd::ScopedBackend scalar(simd::Backend::kScalar);
  Model m = build_model(kind, 4, 2024);
  m.forward(golden_input(), Mode::kTrain);
  return values_of(m.forward(golden_input(), Mode::kEval));
}

TEST(GoldenTrace, RvnnLogits) {
  const std::vector<double> expected = {0x1.06ab7d7366abep+0, 0x1.5231b2be93d53p+0, 0x0p+0, 0x1.13ff968857c88p-3, 0x1.336b84f1289p-1, 0x1.53ce25e3f6674p-1, 0x1.49d2d91ba7cb2p-8, 0x1.644257429a71ap-1};
  EXPECT_EQ(golden_logits(ModelKind::kRvnn), expected);
}

TEST(GoldenTrace, CvnnLogits) {
  const std::vector<double> expected = {0x1.09d24b43cf36ep-1, 0x1.f5924f7aa458p-3, 0x1.cf166794d985ap-6, 0x1.0f5929e07540dp-3, 0x1.3e0f08e39f3e5p-3, 0x1.5186549fb008ap-2, 0x1.078770f432781p-2, 0x1.87395a7cd4565p-4};
  EXPECT_EQ(golden_logits(ModelKind::kCvnn), expected);
}

TEST(GoldenTrace, TraceCoversEveryLayer) {
  Model m = build_cvnn(4, 2024);
  ForwardTrace trace;
  const Tensor logits = m.forward(golden_input(), Mode::kEval, &trace);
  ASSERT_EQ(trace.size(), m.layers().size());
  EXPECT_EQ(values_of(std::get<Tensor>(trace.back().second)), values_of(logits));
  EXPECT_EQ(std::get<ComplexTensor>(trace[0].second).shape(), (Shape{2, 64, 1, 26}));
  EXPECT_EQ(std::get<ComplexTensor>(trace[3].second).shape(), (Shape{2, 4, 1, 3}));
}

TEST(Ablation, AllTwelveNamesRoundTrip) {
  const std::vector<std::string> expected = {"L1_O_RE",  "L1_O_IM",  "L1_C_RE",  "L1_C_IM",  "L2_O_RE",  "L2_O_IM",
                                             "L2_C_RE",  "L2_C_IM",  "L12_O_RE", "L12_O_IM", "L12_C_RE", "L12_C_IM"};
  const auto all = AblationConfig::all();
  for (std::size_t i = 0; i < 12; ++i) {
    EXPECT_EQ(all[i].name(), expected[i]);
    EXPECT_EQ(AblationConfig::parse(expected[i]), all[i]);
  }
  EXPECT_EQ(AblationConfig::parse("none").name(), "none");
  EXPECT_FALSE(AblationConfig::parse("none").active());
  for (const char* bad : {"L3_C_RE", "l1_c_re", "L1_X_RE", "L1_C", ""}) EXPECT_THROW(AblationConfig::parse(bad), std::invalid_argument);
}

TEST(Ablation, RvnnIsRejected) {
  EXPECT_THROW(apply_ablation(build_rvnn(5, 0), AblationConfig::parse("L1_O_IM")), std::invalid_argument);
  EXPECT_THROW(build_model(ModelKind::kRvnn, 5, 0, AblationConfig::parse("L2_C_RE")), std::invalid_argument);
  EXPECT_THROW(apply_ablation(build_model(ModelKind::kCvnn, 5, 0, AblationConfig::parse("L2_C_RE")),
                              AblationConfig::parse("L1_C_RE")),
               std::invalid_argument);
}

TEST(Ablation, OutputConfigsZeroTheNamedPart) {
  std::mt19937_64 rng(3);
  for (const AblationConfig& cfg : AblationConfig::all()) {
    if (cfg.target != AblationTarget::kOutput) continue;
    Model m = build_model(ModelKind::kCvnn, 5, 4, cfg);
    for (int trial = 0; trial < 100; ++trial) {
      ForwardTrace trace;
      m.forward(random_batch(2, rng), trial % 2 ? Mode::kTrain : Mode::kEval, &trace);
      for (int layer = 1; layer <= 2; ++layer) {
        auto it = std::find_if(trace.begin(), trace.end(), [&](const auto& e) { return e.first == layer_output_name(layer); });
        ASSERT_EQ(it != trace.end(), cfg.covers_layer(layer)) << cfg.name();
        if (it == trace.end()) continue;
        const auto& h = std::get<ComplexTensor>(it->second);
        const Tensor& zeroed = cfg.part == AblationPart::kReal ? h.re() : h.im();
        const Tensor& kept = cfg.part == AblationPart::kReal ? h.im() : h.re();
        for (double v : zeroed.values()) ASSERT_EQ(v, 0.0) << cfg.name();
        (void)kept;
      }
    }
  }
}

TEST(Ablation, ConvConfigsStayZeroThroughTraining) {
  std::mt19937_64 rng(5);
  for (const AblationConfig& cfg : AblationConfig::all()) {
    if (cfg.target != AblationTarget::kConv) continue;
    Model m = build_model(ModelKind::kCvnn, 3, 6, cfg);
    auto frozen = [&] {
      std::vector<const Parameter*> out;
      for (const Parameter* p : m.parameters())
        if (p->frozen_zero) out.push_back(p);
      return out;
    };
    ASSERT_EQ(frozen().size(), cfg.layers == AblationLayers::kL12 ? 2u : 1u) << cfg.name();
    for (const Parameter* p : frozen()) {
      const char suffix = cfg.part == AblationPart::kReal ? 'A' : 'B';
      EXPECT_EQ(p->name.back(), suffix);
      for (double v : p->tensor.values()) ASSERT_EQ(v, 0.0);
    }
    Optimizer opt(OptimizerKind::kAdam, 1e-2, m.parameters());
    std::uniform_int_distribution<std::size_t> label(0, 2);
    for (int step = 0; step < 100; ++step) {
      m.zero_grad();
      const std::vector<std::size_t> labels{label(rng), label(rng), label(rng)};
      softmax_cross_entropy(m.forward(random_batch(3, rng), Mode::kTrain), labels).backward();
      opt.step();
      m.enforce_frozen();
    }
    for (const Parameter* p : frozen())
      for (double v : p->tensor.values()) ASSERT_EQ(v, 0.0) << cfg.name();
  }
}

TEST(Ablation, L1ConvImagEqualsHandZeroedFilter) {
  std::mt19937_64 rng(7);
  Model ablated = build_model(ModelKind::kCvnn, 5, 8, AblationConfig::parse("L1_C_IM"));
  Model manual = build_cvnn(5, 8);
  for (Parameter* p : manual.parameters())
    if (p->name == "L1.cconv.B")
      for (double& v : p->tensor.mutable_values()) v = 0.0;
  const Tensor batch = random_batch(4, rng);
  EXPECT_EQ(values_of(ablated.forward(batch, Mode::kTrain)), values_of(manual.forward(batch, Mode::kTrain)));
  EXPECT_EQ(values_of(ablated.forward(batch, Mode::kEval)), values_of(manual.forward(batch, Mode::kEval)));
}

TEST(Ablation, L1ConvImagCollapsesToRealFilterOnBothParts) {
  std::mt19937_64 rng(9);
  Model m = build_model(ModelKind::kCvnn, 5, 10, AblationConfig::parse("L1_C_IM"));
  const Tensor batch = random_batch(2, rng);
  ForwardTrace trace;
  m.forward(batch, Mode::kEval, &trace);
  const auto& out = std::get<ComplexTensor>(trace[0].second);
  const Parameter* a = m.parameters()[0];
  ASSERT_EQ(a->name, "L1.cconv.A");
  std::vector<double> x(kSliceLength), y(kSliceLength);
  for (std::size_t i = 0; i < kSliceLength; ++i) {
    x[i] = batch.values()[i];
    y[i] = batch.values()[kSliceLength + i];
  }
  const Tensor ax = conv2d(Tensor::from({1, 1, 1, kSliceLength}, x), a->tensor, {1, 3});
  const Tensor ay = conv2d(Tensor::from({1, 1, 1, kSliceLength}, y), a->tensor, {1, 3});
  for (std::size_t i = 0; i < ax.size(); ++i) {
    EXPECT_NEAR(out.re().values()[i], ax.values()[i], 1e-12);
    EXPECT_NEAR(out.im().values()[i], ay.values()[i], 1e-12);
  }
}

TEST(Checkpoint, RoundTripIsBitExact) {
  std::mt19937_64 rng(12);
  testing::TempDir dir("ckpt");
  for (ModelKind kind : {ModelKind::kRvnn, ModelKind::kCvnn}) {
    Model m = build_model(kind, 4, 13, kind == ModelKind::kCvnn ? AblationConfig::parse("L2_O_RE") : AblationConfig::none());
    Optimizer opt(OptimizerKind::kAdam, 1e-2, m.parameters());
    const std::vector<std::size_t> labels{0, 1, 2, 3};
    for (int s = 0; s < 3; ++s) {
      m.zero_grad();
      softmax_cross_entropy(m.forward(random_batch(4, rng), Mode::kTrain), labels).backward();
      opt.step();
    }
    const auto path = dir / (std::string(to_string(kind)) + ".json");
    save_checkpoint(m, path);
    Model back = load_checkpoint(path);
    EXPECT_EQ(back.kind(), kind);
    EXPECT_EQ(back.seed(), 13u);
    EXPECT_EQ(back.ablation(), m.ablation());
    const auto pa = m.parameters(), pb = back.parameters();
    ASSERT_EQ(pa.size(), pb.size());
    for (std::size_t i = 0; i < pa.size(); ++i) {
      EXPECT_EQ(pa[i]->name, pb[i]->name);
      EXPECT_EQ(values_of(pa[i]->tensor), values_of(pb[i]->tensor));
    }
    const auto ba = m.buffers(), bb = back.buffers();
    ASSERT_EQ(ba.size(), bb.size());
    for (std::size_t i = 0; i < ba.size(); ++i) EXPECT_EQ(*ba[i].values, *bb[i].values);
    const Tensor batch = random_batch(3, rng);
    EXPECT_EQ(values_of(m.forward(batch, Mode::kEval)), values_of(back.forward(batch, Mode::kEval)));
    EXPECT_EQ(checkpoint_to_string(back), checkpoint_to_string(m));
  }
  EXPECT_THROW(checkpoint_from_string("{\"format\":\"other\"}"), std::exception);
}

}  // namespace
}  // namespace rfcvnn
