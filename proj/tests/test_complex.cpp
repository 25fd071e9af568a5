#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "rfcvnn/complex.hpp"
#include "rfcvnn/gradcheck.hpp"
#include "test_util.hpp"

namespace rfcvnn {
namespace {

using testing::max_abs_diff;
using testing::random_tensor;

ComplexTensor random_complex(const Shape& s, std::mt19937_64& rng, bool grad = false, double scale = 1.0) {
  return {random_tensor(s, rng, grad, scale), random_tensor(s, rng, grad, scale)};
}

// (ar + i ai) * h
ComplexTensor cmul(double ar, double ai, const ComplexTensor& h) {
  return {scale(h.re(), ar) - scale(h.im(), ai), scale(h.im(), ar) + scale(h.re(), ai)};
}

ComplexTensor cadd(const ComplexTensor& a, const ComplexTensor& b) { return {a.re() + b.re(), a.im() + b.im()}; }

std::vector<double> values_of(const Tensor& t) { return {t.values().begin(), t.values().end()}; }

TEST(CConv2d, MultiplicationByI) {
  const ComplexTensor h{Tensor::from({1, 1, 1, 1}, {1.0}), Tensor::from({1, 1, 1, 1}, {2.0})};
  const ComplexConvFilter w{Tensor::from({1, 1, 1, 1}, {0.0}), Tensor::from({1, 1, 1, 1}, {1.0})};
  const ComplexTensor out = cconv2d(h, w, {1, 1});
  EXPECT_EQ(out.re().values()[0], -2.0);
  EXPECT_EQ(out.im().values()[0], 1.0);
}

TEST(CConv2d, FirstLayerShape) {
  std::mt19937_64 rng(1);
  const ComplexTensor h = random_complex({2, 1, 1, 100}, rng);
  const ComplexConvFilter w{random_tensor({64, 1, 1, 25}, rng), random_tensor({64, 1, 1, 25}, rng)};
  EXPECT_EQ(cconv2d(h, w, {1, 3}).shape(), (Shape{2, 64, 1, 26}));
}

TEST(CConv2d, ShapeErrors) {
  std::mt19937_64 rng(2);
  EXPECT_THROW(ComplexTensor(Tensor::zeros({1, 2}), Tensor::zeros({2, 1})), ShapeError);
  const ComplexTensor h = random_complex({1, 2, 1, 10}, rng);
  EXPECT_THROW(cconv2d(h, {random_tensor({3, 2, 1, 3}, rng), random_tensor({3, 2, 1, 4}, rng)}, {1, 1}), ShapeError);
  EXPECT_THROW(cconv2d(h, {random_tensor({3, 1, 1, 3}, rng), random_tensor({3, 1, 1, 3}, rng)}, {1, 1}), ShapeError);
}

// Stacks [re; im] on the channel axis and convolves with [[A, -B], [B, A]].
TEST(CConv2d, BlockMatrixOracleOnHundredInstances) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + trial % 3, ci = 1 + trial % 2, co = 2 + trial % 4, w = 12 + trial % 7, kw = 1 + trial % 5;
    const ComplexTensor h = random_complex({n, ci, 1, w}, rng);
    const ComplexConvFilter f{random_tensor({co, ci, 1, kw}, rng), random_tensor({co, ci, 1, kw}, rng)};
    const Extent2 stride{1, 1 + static_cast<std::size_t>(trial % 3)};
    const ComplexTensor out = cconv2d(h, f, stride);

    std::vector<double> stacked(n * 2 * ci * w);
    for (std::size_t b = 0; b < n; ++b)
      for (std::size_t c = 0; c < ci; ++c)
        for (std::size_t j = 0; j < w; ++j) {
          stacked[(b * 2 * ci + c) * w + j] = h.re().values()[(b * ci + c) * w + j];
          stacked[(b * 2 * ci + ci + c) * w + j] = h.im().values()[(b * ci + c) * w + j];
        }
    std::vector<double> block(2 * co * 2 * ci * kw);
    auto at = [&](std::size_t o, std::size_t c, std::size_t k) -> double& { return block[(o * 2 * ci + c) * kw + k]; };
    for (std::size_t o = 0; o < co; ++o)
      for (std::size_t c = 0; c < ci; ++c)
        for (std::size_t k = 0; k < kw; ++k) {
          const double a = f.a.values()[(o * ci + c) * kw + k], bb = f.b.values()[(o * ci + c) * kw + k];
          at(o, c, k) = a;
          at(o, ci + c, k) = -bb;
          at(co + o, c, k) = bb;
          at(co + o, ci + c, k) = a;
        }
    const Tensor ref = conv2d(Tensor::from({n, 2 * ci, 1, w}, stacked), Tensor::from({2 * co, 2 * ci, 1, kw}, block), stride);
    const std::size_t ow = out.shape()[3];
    double err = 0.0;
    for (std::size_t b = 0; b < n; ++b)
      for (std::size_t o = 0; o < co; ++o)
        for (std::size_t j = 0; j < ow; ++j) {
          err = std::max(err, std::abs(out.re().values()[(b * co + o) * ow + j] - ref.values()[(b * 2 * co + o) * ow + j]));
          err = std::max(err, std::abs(out.im().values()[(b * co + o) * ow + j] - ref.values()[(b * 2 * co + co + o) * ow + j]));
        }
    ASSERT_LE(err, 1e-10) << "trial " << trial;
  }
}

TEST(CConv2d, ComplexHomogeneity) {
  std::mt19937_64 rng(4);
  const ComplexTensor h = random_complex({3, 2, 1, 40}, rng);
  const ComplexConvFilter f{random_tensor({5, 2, 1, 7}, rng), random_tensor({5, 2, 1, 7}, rng)};
  const ComplexTensor lhs = cconv2d(cmul(0, 1, h), f, {1, 3});
  const ComplexTensor rhs = cmul(0, 1, cconv2d(h, f, {1, 3}));
  EXPECT_LE(max_abs_diff(lhs.re().values(), rhs.re().values()), 1e-10);
  EXPECT_LE(max_abs_diff(lhs.im().values(), rhs.im().values()), 1e-10);
}

TEST(CConv2d, ComplexLinearity) {
  std::mt19937_64 rng(5);
  const ComplexTensor h1 = random_complex({2, 1, 1, 30}, rng), h2 = random_complex({2, 1, 1, 30}, rng);
  const ComplexConvFilter f{random_tensor({4, 1, 1, 5}, rng), random_tensor({4, 1, 1, 5}, rng)};
  const ComplexTensor lhs = cconv2d(cadd(cmul(0.3, -1.2, h1), cmul(-0.7, 0.4, h2)), f, {1, 1});
  const ComplexTensor rhs = cadd(cmul(0.3, -1.2, cconv2d(h1, f, {1, 1})), cmul(-0.7, 0.4, cconv2d(h2, f, {1, 1})));
  EXPECT_LE(max_abs_diff(lhs.re().values(), rhs.re().values()), 1e-10);
  EXPECT_LE(max_abs_diff(lhs.im().values(), rhs.im().values()), 1e-10);
}

TEST(CRelu, Examples) {
  const ComplexTensor out = crelu({Tensor::from({1}, {-1.0}), Tensor::from({1}, {2.0})});
  EXPECT_EQ(out.re().values()[0], 0.0);
  EXPECT_EQ(out.im().values()[0], 2.0);
  const ComplexTensor pos{Tensor::from({3}, {0.5, 1, 2}), Tensor::from({3}, {3, 0.1, 9})};
  const ComplexTensor same = crelu(pos);
  EXPECT_EQ(values_of(same.re()), values_of(pos.re()));
  EXPECT_EQ(values_of(same.im()), values_of(pos.im()));
}

TEST(InverseSqrt2x2, SquaresToInverse) {
  for (auto [a, b, c] : {std::tuple{1.0, 0.0, 1.0}, {2.0, 0.5, 1.0}, {0.3, -0.2, 4.0}, {1e-4, 0.0, 9.0}}) {
    const Sym2 w = inverse_sqrt_2x2(a, b, c);
    // W * V * W == I
    const double vw_rr = a * w.rr + b * w.ri, vw_ri = a * w.ri + b * w.ii;
    const double vw_ir = b * w.rr + c * w.ri, vw_ii = b * w.ri + c * w.ii;
    EXPECT_NEAR(w.rr * vw_rr + w.ri * vw_ir, 1.0, 1e-12);
    EXPECT_NEAR(w.rr * vw_ri + w.ri * vw_ii, 0.0, 1e-12);
    EXPECT_NEAR(w.ri * vw_ri + w.ii * vw_ii, 1.0, 1e-12);
  }
  EXPECT_THROW(inverse_sqrt_2x2(1.0, 2.0, 1.0), NumericError);
}

TEST(CBatchNorm, ConstantInputGivesBeta) {
  ComplexBNState st(2);
  st.beta_re.mutable_values()[0] = 0.25;
  st.beta_im.mutable_values()[1] = -1.5;
  const ComplexTensor h{Tensor::full({4, 2, 1, 6}, 3.0), Tensor::full({4, 2, 1, 6}, -2.0)};
  const ComplexTensor out = cbatchnorm(h, st, Mode::kTrain);
  for (std::size_t i = 0; i < out.re().size(); ++i) {
    const std::size_t c = (i / 6) % 2;
    EXPECT_NEAR(out.re().values()[i], c == 0 ? 0.25 : 0.0, 1e-12);
    EXPECT_NEAR(out.im().values()[i], c == 1 ? -1.5 : 0.0, 1e-12);
  }
}

TEST(CBatchNorm, UnitInputGivesHalfVariancePerComponent) {
  std::mt19937_64 rng(6);
  ComplexBNState st(1);
  const ComplexTensor h = random_complex({100, 1, 1, 120}, rng);
  const ComplexTensor out = cbatchnorm(h, st, Mode::kTrain);
  for (const Tensor* t : {&out.re(), &out.im()}) {
    double m = 0.0, v = 0.0;
    for (double x : t->values()) m += x;
    m /= static_cast<double>(t->size());
    for (double x : t->values()) v += (x - m) * (x - m);
    v /= static_cast<double>(t->size());
    EXPECT_NEAR(v, 0.5, 0.05);
  }
}

TEST(CBatchNorm, WhitenedCovarianceIsIdentity) {
  std::mt19937_64 rng(7);
  ComplexBNState st(3);
  // Correlated, unequal-variance input.
  const Tensor x = random_tensor({16, 3, 1, 50}, rng, false, 2.0);
  const Tensor y = scale(x, 0.6) + random_tensor({16, 3, 1, 50}, rng, false, 0.3);
  const ComplexTensor out = complex_whiten({add_scalar(x, 1.0), y}, st, Mode::kTrain);
  for (std::size_t c = 0; c < 3; ++c) {
    double mr = 0, mi = 0, rr = 0, ii = 0, ri = 0;
    std::size_t cnt = 0;
    for (std::size_t n = 0; n < 16; ++n)
      for (std::size_t j = 0; j < 50; ++j) {
        const std::size_t k = (n * 3 + c) * 50 + j;
        mr += out.re().values()[k];
        mi += out.im().values()[k];
        ++cnt;
      }
    mr /= cnt;
    mi /= cnt;
    for (std::size_t n = 0; n < 16; ++n)
      for (std::size_t j = 0; j < 50; ++j) {
        const std::size_t k = (n * 3 + c) * 50 + j;
        const double a = out.re().values()[k] - mr, b = out.im().values()[k] - mi;
        rr += a * a;
        ii += b * b;
        ri += a * b;
      }
    EXPECT_NEAR(rr / cnt, 1.0, 1e-3);
    EXPECT_NEAR(ii / cnt, 1.0, 1e-3);
    EXPECT_LT(std::abs(ri / cnt), 1e-4);
  }
}

TEST(CBatchNorm, TrainModeNeedsTwoSamples) {
  ComplexBNState st(1);
  const ComplexTensor h{Tensor::zeros({1, 1, 1, 5}), Tensor::zeros({1, 1, 1, 5})};
  EXPECT_THROW(cbatchnorm(h, st, Mode::kTrain), ShapeError);
  EXPECT_NO_THROW(cbatchnorm(h, st, Mode::kEval));
}

TEST(CBatchNorm, RunningStatisticsAreUpdatedOnlyInTrainMode) {
  std::mt19937_64 rng(8);
  ComplexBNState st(1);
  const ComplexTensor h = random_complex({6, 1, 1, 4}, rng);
  cbatchnorm(h, st, Mode::kEval);
  EXPECT_EQ(st.running_vrr[0], 1.0);
  cbatchnorm(h, st, Mode::kTrain);
  double m = 0;
  for (double v : h.re().values()) m += v;
  m /= 24.0;
  EXPECT_NEAR(st.running_mean_re[0], 0.1 * m, 1e-15);
  EXPECT_NE(st.running_vri[0], 0.0);
}

// Whitening written out with primitive ops; gradients flow through autograd.
ComplexTensor composite_cbn(const ComplexTensor& h, const Tensor& grr, const Tensor& gii, const Tensor& gri,
                            const Tensor& br, const Tensor& bi, double eps) {
  const Shape& s = h.shape();
  auto bc = [&](const Tensor& v) { return broadcast_channels(v, s); };
  const Tensor cr = h.re() - bc(channel_mean(h.re()));
  const Tensor ci = h.im() - bc(channel_mean(h.im()));
  const Tensor a = add_scalar(channel_mean(cr * cr), eps);
  const Tensor d = add_scalar(channel_mean(ci * ci), eps);
  const Tensor b = channel_mean(cr * ci);
  const Tensor sq = sqrt(a * d - b * b);
  const Tensor t = sqrt(a + d + scale(sq, 2.0));
  const Tensor inv = reciprocal(sq * t);
  const Tensor wrr = (d + sq) * inv, wii = (a + sq) * inv, wri = scale(b * inv, -1.0);
  const Tensor xr = bc(wrr) * cr + bc(wri) * ci;
  const Tensor xi = bc(wri) * cr + bc(wii) * ci;
  return {bc(grr) * xr + bc(gri) * xi + bc(br), bc(gri) * xr + bc(gii) * xi + bc(bi)};
}

TEST(CBatchNorm, FusedMatchesCompositeOracle) {
  std::mt19937_64 rng(9);
  ComplexBNState st(2);
  st.gamma_rr.mutable_values()[0] = 1.1;
  st.gamma_ri.mutable_values()[1] = 0.2;
  st.beta_im.mutable_values()[0] = 0.4;
  const ComplexTensor h = random_complex({5, 2, 1, 9}, rng, true);
  const ComplexTensor up = random_complex({5, 2, 1, 9}, rng);
  const ComplexTensor out = cbatchnorm(h, st, Mode::kTrain);
  Tensor loss = sum(out.re() * up.re() + out.im() * up.im());
  loss.backward();

  auto copy = [](const Tensor& t) { return Tensor::from(t.shape(), values_of(t), true); };
  const ComplexTensor h2{copy(h.re()), copy(h.im())};
  Tensor grr = copy(st.gamma_rr), gii = copy(st.gamma_ii), gri = copy(st.gamma_ri);
  Tensor br = copy(st.beta_re), bi = copy(st.beta_im);
  const ComplexTensor ref = composite_cbn(h2, grr, gii, gri, br, bi, st.eps);
  Tensor loss2 = sum(ref.re() * up.re() + ref.im() * up.im());
  loss2.backward();

  EXPECT_LE(max_abs_diff(out.re().values(), ref.re().values()), 1e-12);
  EXPECT_LE(max_abs_diff(out.im().values(), ref.im().values()), 1e-12);
  EXPECT_LE(max_abs_diff(h.re().grad(), h2.re().grad()), 1e-10);
  EXPECT_LE(max_abs_diff(h.im().grad(), h2.im().grad()), 1e-10);
  EXPECT_LE(max_abs_diff(st.gamma_ri.grad(), gri.grad()), 1e-10);
  EXPECT_LE(max_abs_diff(st.beta_im.grad(), bi.grad()), 1e-10);
}

TEST(CAvgPool, HeadShapeAndComponentwiseOracle) {
  std::mt19937_64 rng(10);
  const ComplexTensor h = random_complex({2, 20, 1, 3}, rng);
  const ComplexTensor out = cavgpool(h, {1, 3}, {1, 1});
  EXPECT_EQ(out.shape(), (Shape{2, 20, 1, 1}));
  EXPECT_EQ(values_of(out.re()), values_of(avgpool2d(h.re(), {1, 3}, {1, 1})));
  EXPECT_EQ(values_of(out.im()), values_of(avgpool2d(h.im(), {1, 3}, {1, 1})));
  const ComplexTensor c = cavgpool({Tensor::full({1, 2, 1, 3}, 0.5), Tensor::full({1, 2, 1, 3}, -4.0)}, {1, 3}, {1, 1});
  for (double v : c.re().values()) EXPECT_DOUBLE_EQ(v, 0.5);
  for (double v : c.im().values()) EXPECT_DOUBLE_EQ(v, -4.0);
  EXPECT_THROW(cavgpool(h, {1, 4}, {1, 1}), ShapeError);
}

TEST(Magnitude, ExamplesAndSingularity) {
  EXPECT_NEAR(magnitude({Tensor::from({1}, {3.0}), Tensor::from({1}, {4.0})}).item(), 5.0, 1e-9);
  const ComplexTensor z{Tensor::from({1}, {0.0}, true), Tensor::from({1}, {0.0}, true)};
  Tensor m = magnitude(z);
  EXPECT_LT(m.item(), 1e-5);
  m.backward();
  EXPECT_TRUE(std::isfinite(z.re().grad()[0]));
  EXPECT_TRUE(std::isfinite(z.im().grad()[0]));
}

TEST(Magnitude, NonNegativeWithFiniteGradients) {
  std::mt19937_64 rng(11);
  const ComplexTensor h = random_complex({500}, rng, true, 100.0);
  Tensor m = magnitude(h);
  for (double v : m.values()) EXPECT_GE(v, 0.0);
  sum(m).backward();
  for (double g : h.re().grad()) EXPECT_TRUE(std::isfinite(g));
}

class ComplexGradients : public ::testing::TestWithParam<int> {};

TEST_P(ComplexGradients, MatchCentralDifferences) {
  std::mt19937_64 rng(200 + GetParam());
  const double tol = 1e-5;
  auto loss_of = [](const ComplexTensor& o, const ComplexTensor& up) { return sum(o.re() * up.re() + o.im() * up.im()); };
  {
    const ComplexTensor h = random_complex({2, 2, 1, 12}, rng, true);
    const ComplexConvFilter f{random_tensor({3, 2, 1, 4}, rng, true), random_tensor({3, 2, 1, 4}, rng, true)};
    const ComplexTensor up = random_complex({2, 3, 1, 3}, rng);
    EXPECT_LT(finite_diff_check([&] { return loss_of(cconv2d(h, f, {1, 3}), up); }, {h.re(), h.im(), f.a, f.b})
                  .max_rel_error,
              tol);
  }
  {
    const ComplexTensor h = random_complex({3, 5}, rng, true);
    const ComplexTensor up = random_complex({3, 5}, rng);
    EXPECT_LT(finite_diff_check([&] { return loss_of(crelu(h), up); }, {h.re(), h.im()}).max_rel_error, tol);
  }
  for (ComplexBNVariant variant : {ComplexBNVariant::kWhitening, ComplexBNVariant::kNaive}) {
    ComplexBNState st(2, variant);
    st.gamma_ri.mutable_values()[0] = 0.3;
    st.beta_re.mutable_values()[1] = -0.2;
    const ComplexTensor h = random_complex({4, 2, 1, 5}, rng, true);
    const ComplexTensor up = random_complex({4, 2, 1, 5}, rng);
    for (Mode mode : {Mode::kTrain, Mode::kEval})
      EXPECT_LT(finite_diff_check([&] { return loss_of(cbatchnorm(h, st, mode), up); },
                                  {h.re(), h.im(), st.gamma_rr, st.gamma_ii, st.gamma_ri, st.beta_re, st.beta_im})
                    .max_rel_error,
                tol);
  }
  {
    const ComplexTensor h = random_complex({2, 3, 1, 3}, rng, true);
    const ComplexTensor up = random_complex({2, 3, 1, 1}, rng);
    EXPECT_LT(finite_diff_check([&] { return loss_of(cavgpool(h, {1, 3}, {1, 1}), up); }, {h.re(), h.im()}).max_rel_error,
              tol);
  }
  {
    const ComplexTensor h = random_complex({10}, rng, true);
    const Tensor up = random_tensor({10}, rng);
    EXPECT_LT(finite_diff_check([&] { return sum(magnitude(h) * up); }, {h.re(), h.im()}).max_rel_error, tol);
  }
}

INSTANTIATE_TEST_SUITE_P(TenPoints, ComplexGradients, ::testing::Range(0, 10));

}  // namespace
}  // namespace rfcvnn
