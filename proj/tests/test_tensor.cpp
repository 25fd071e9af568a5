#include <gtest/gtest.h>

#include <random>

#include "rfcvnn/ops.hpp"
#include "rfcvnn/tensor.hpp"
#include "test_util.hpp"

namespace rfcvnn {
namespace {

TEST(Tensor, FactoriesCheckSizes) {
  const Tensor z = Tensor::zeros({2, 3});
  EXPECT_EQ(z.size(), 6u);
  EXPECT_EQ(z.rank(), 2u);
  for (double v : z.values()) EXPECT_EQ(v, 0.0);
  EXPECT_THROW(Tensor::from({2, 2}, {1, 2, 3}), ShapeError);
  EXPECT_EQ(Tensor::scalar(4.5).item(), 4.5);
  EXPECT_THROW(Tensor::zeros({2}).item(), ShapeError);
  EXPECT_EQ(shape_size({}), 1u);
  EXPECT_EQ(to_string(Shape{2, 1, 100}), "[2x1x100]");
}

TEST(Tensor, GradIsZeroUntilBackwardAndAfterZeroGrad) {
  Tensor x = Tensor::from({3}, {1, 2, 3}, true);
  for (double g : x.grad()) EXPECT_EQ(g, 0.0);
  sum(x * x).backward();
  EXPECT_EQ(x.grad()[2], 6.0);
  x.zero_grad();
  for (double g : x.grad()) EXPECT_EQ(g, 0.0);
}

TEST(Tensor, LeafGradientsAccumulateAcrossBackwardCalls) {
  Tensor x = Tensor::from({2}, {1, -2}, true);
  sum(scale(x, 3.0)).backward();
  sum(scale(x, 3.0)).backward();
  EXPECT_EQ(x.grad()[0], 6.0);
  EXPECT_EQ(x.grad()[1], 6.0);
}

TEST(Tensor, NonScalarBackwardNeedsSeed) {
  Tensor x = Tensor::from({2}, {1, 2}, true);
  Tensor y = scale(x, 2.0);
  EXPECT_THROW(y.backward(), GraphError);
  const std::vector<double> seed{1.0, 10.0};
  y.backward(seed);
  EXPECT_EQ(x.grad()[0], 2.0);
  EXPECT_EQ(x.grad()[1], 20.0);
}

TEST(Tensor, SeedSizeMustMatch) {
  Tensor x = Tensor::from({2}, {1, 2}, true);
  Tensor y = scale(x, 2.0);
  const std::vector<double> seed{1.0};
  EXPECT_THROW(y.backward(seed), GraphError);
}

TEST(Tensor, SecondBackwardThroughConsumedGraphFails) {
  Tensor x = Tensor::from({2}, {1, 2}, true);
  Tensor loss = sum(x * x);
  loss.backward();
  EXPECT_THROW(loss.backward(), GraphError);
}

TEST(Tensor, OpsWithoutGradInputsRecordNothing) {
  const Tensor a = Tensor::from({2}, {1, 2});
  const Tensor b = a * a + a;
  EXPECT_FALSE(b.requires_grad());
  EXPECT_THROW(ComputationGraph::capture(b), GraphError);
  EXPECT_THROW(Tensor(b).backward(), GraphError);
}

TEST(Tensor, RequiresGradOnlySettableOnLeaves) {
  Tensor x = Tensor::from({1}, {1}, true);
  Tensor y = scale(x, 2.0);
  EXPECT_THROW(y.set_requires_grad(false), GraphError);
  Tensor z = Tensor::from({1}, {1});
  z.set_requires_grad(true);
  EXPECT_TRUE(z.requires_grad());
  EXPECT_TRUE(z.is_leaf());
  EXPECT_FALSE(y.is_leaf());
}

TEST(Tensor, DetachDropsHistory) {
  Tensor x = Tensor::from({2}, {1, 2}, true);
  Tensor d = (x * x).detach();
  EXPECT_FALSE(d.requires_grad());
  EXPECT_EQ(d.values()[1], 4.0);
}

TEST(ComputationGraph, ReverseTraversalVisitsEveryOpOnce) {
  Tensor x = Tensor::from({2}, {0.5, -1.5}, true);
  Tensor a = x * x;      // shared twice below
  Tensor b = a + a;
  Tensor c = relu(b) + a;
  Tensor loss = sum(c);
  auto graph = ComputationGraph::capture(loss);
  const auto names = graph.op_names();
  EXPECT_EQ(graph.op_count(), 5u);  // mul, add, relu, add, sum
  EXPECT_EQ(names.front(), "sum");
  EXPECT_EQ(names.back(), "mul");
  const std::vector<double> seed{1.0};
  graph.replay(seed);
  // d/dx sum(relu(2x^2) + x^2) = 4x*1 + 2x = 6x
  EXPECT_DOUBLE_EQ(x.grad()[0], 3.0);
  EXPECT_DOUBLE_EQ(x.grad()[1], -9.0);
  EXPECT_THROW(graph.replay(seed), GraphError);
}

TEST(ComputationGraph, ReplayIsBitIdenticalForIdenticalForward) {
  std::mt19937_64 rng(9);
  const auto xv = testing::normal_values(2 * 3 * 1 * 12, rng);
  const auto fv = testing::normal_values(4 * 3 * 1 * 5, rng);
  auto run = [&] {
    Tensor x = Tensor::from({2, 3, 1, 12}, xv, true);
    Tensor f = Tensor::from({4, 3, 1, 5}, fv, true);
    sum(relu(conv2d(x, f, {1, 2}))).backward();
    std::vector<double> g(x.grad().begin(), x.grad().end());
    g.insert(g.end(), f.grad().begin(), f.grad().end());
    return g;
  };
  EXPECT_EQ(run(), run());
}

}  // namespace
}  // namespace rfcvnn
